#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <armadillo>

#include "areal/geo.hpp"

namespace areal {

struct OlsFit {
  std::vector<std::string> names;  // "intercept" first, then columns
  arma::vec coef;
  arma::vec se;
  arma::vec tstat;
  arma::vec pvalue;
  arma::vec fitted;
  arma::vec residuals;
  double rss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double aic = 0.0;
  double rmse = 0.0;  // sqrt(RSS/n), in-sample
  std::size_t n = 0;
  std::size_t p = 0;  // columns, excluding intercept
};

// Least squares via QR with an intercept prepended. Inference: SE from
// sigma^2 (X'X)^-1 with sigma^2 = RSS/(n-p-1), two-sided p from Student's t.
// AIC = n*ln(2*pi*RSS/n) + n + 2(p+2). Rank deficiency (relative singular
// value below 1e-10) is an error listing the dependent columns.
OlsFit ols_fit(const arma::mat& X, const arma::vec& y,
               const std::vector<std::string>& names);

// exp(-(d/b)^2 / 2); bandwidth must be positive.
arma::vec gaussian_weights(const arma::vec& distances, double bandwidth);

struct GwrOptions {
  // Replaces every kernel weight with 1, making each local fit the global
  // OLS fit. Used to verify the OLS limit.
  bool force_uniform = false;
  // When positive, use this fixed distance (meters) as the kernel bandwidth
  // for every unit instead of the adaptive k-nearest rule.
  double fixed_bandwidth_m = 0.0;
  int threads = 1;
};

struct GwrFit {
  int bandwidth = 0;  // k, nearest-neighbor count
  std::vector<std::string> names;
  arma::mat local_coef;  // n x (p+1), column 0 = intercept
  arma::vec fitted;
  arma::vec residuals;
  arma::vec std_residuals;
  arma::vec hat_diag;
  double tr_s = 0.0;
  double tr_sts = 0.0;
  double enp = 0.0;  // effective parameters: 2 tr(S) - tr(S'S)
  double rss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double aicc = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
};

// One kernel-weighted least-squares fit per unit. Adaptive bandwidth: each
// unit's kernel scale is its distance to the k-th nearest other unit (zero
// distances fall back to the smallest positive one). AICc uses the hat
// matrix trace: n*ln(RSS/n) + n*ln(2*pi) + n*(n + tr(S))/(n - 2 - tr(S)).
// `row_ids` (optional, for messages) names units in errors.
GwrFit gwr_fit(const arma::mat& X, const arma::vec& y,
               const std::vector<std::string>& names,
               const std::vector<Point>& locations, int k, const GwrOptions& opts,
               const std::vector<std::string>& row_ids = {});

struct BandwidthSearch {
  int best_k = 0;
  double best_aicc = 0.0;
  std::map<int, double> profile;          // every evaluated k -> AICc
  std::map<int, std::string> failures;    // k -> error message
};

// Golden-section search over integer k in [k_min, k_max], memoized, interval
// shrunk until small enough to sweep; returns the minimum over everything
// evaluated, ties to the smaller k. Candidates whose fit fails are recorded
// and treated as +infinity.
BandwidthSearch golden_search_bandwidth(const arma::mat& X, const arma::vec& y,
                                        const std::vector<std::string>& names,
                                        const std::vector<Point>& locations,
                                        int k_min, int k_max,
                                        const GwrOptions& opts);

// (eps - mean(eps)) / sd(eps), sample standard deviation (denominator n-1).
arma::vec standardized_residuals(const arma::vec& residuals);

// Jenks natural breaks via exact dynamic programming. Returns class edges:
// min, the k-1 upper bounds of the first k-1 classes, then max (k+1 values).
// When fewer distinct values than classes exist, the class count shrinks.
std::vector<double> jenks_breaks(std::vector<double> values, int n_classes);

}  // namespace areal
