#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <armadillo>

#include "areal/geo.hpp"
#include "areal/ingest.hpp"

namespace areal {

struct CorrelationResult {
  std::string method;  // "pearson" or "spearman"
  double coefficient = 0.0;
  double p_value = 1.0;
};

// Pearson r with two-sided p from t = r*sqrt((n-2)/(1-r^2)), df = n-2.
// |r| = 1 reports p = 0.
CorrelationResult pearson(const arma::vec& x, const arma::vec& y);

// Spearman rho: Pearson on average ranks (ties get mean rank).
CorrelationResult spearman(const arma::vec& x, const arma::vec& y);

struct MoranResult {
  double observed = 0.0;
  double expected = 0.0;  // -1/(n-1)
  double z = 0.0;         // normality-assumption z-score, for reference
  double p_normal = 1.0;
  double p_perm = 1.0;
  int n_perm = 0;
  std::uint64_t seed = 0;
  std::string scheme;
  std::size_t n_used = 0;  // units with at least one neighbor
};

// Global Moran's I over the units that have neighbors; isolated units are
// excluded from the statistic. Permutation p is two-sided on |I - E[I]|
// with the +1 correction, replicate r seeded by derive_seed(seed, r).
MoranResult morans_i(const arma::vec& values, const WeightsMatrix& w, int n_perm,
                     std::uint64_t seed, int threads = 1);

// VIF_j = 1/(1 - R^2_j) from regressing column j on the others plus an
// intercept. Perfect collinearity comes back as +infinity.
arma::vec vif(const arma::mat& X);

struct VifDropEvent {
  int round = 0;  // 0 for pre-pass drops (composition reference, manual)
  std::string variable;
  double vif = 0.0;  // NaN for pre-pass drops (no VIF computed yet)
  std::string reason;  // "composition_reference" | "manual" | "max_vif"
};

struct VifReport {
  // One map per VIF round, in order; keys are the variables still present.
  std::vector<std::map<std::string, double>> rounds;
  std::vector<VifDropEvent> dropped;
  std::vector<std::string> retained;  // original column order
};

struct VifPruneOptions {
  double threshold = 5.0;
  std::vector<CompositionGroup> composition_groups;
  std::vector<std::string> manual_drops;
  int threads = 1;
};

// Stage 1 drops each composition group's reference variable and any manual
// drops; stage 2 repeatedly drops the single highest VIF >= threshold
// (lexicographic tie-break) until all remaining are below it.
VifReport vif_prune(const arma::mat& X, const std::vector<std::string>& names,
                    const VifPruneOptions& opts);

}  // namespace areal
