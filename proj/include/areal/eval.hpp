#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <armadillo>

#include "areal/diagnostics.hpp"
#include "areal/folds.hpp"
#include "areal/linmod.hpp"
#include "areal/mlmod.hpp"
#include "areal/rates.hpp"

namespace areal {

// Cross-validated model family: statistical models (ols, gwr) report
// in-sample fit elsewhere and never go through CV.
struct ModelSpec {
  enum class Kind { rf, mlp };
  Kind kind = Kind::rf;
  RfConfig rf;
  MlpConfig mlp;
};

struct CvOptions {
  // Skip the per-fold scaler and consume X as already standardized. The
  // default re-standardizes inside each fold from training rows only.
  bool prestandardized = false;
  int threads = 1;
};

struct FoldDetail {
  int fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double r2 = 0.0;
  double rmse = 0.0;
  arma::vec scaler_mean;  // the scaler actually applied to this fold
  arma::vec scaler_std;
  arma::vec importance;  // RF only, empty otherwise
  bool importance_defined = false;
};

struct CvResult {
  double mean_r2 = 0.0;
  double pooled_rmse = 0.0;  // sqrt(sum of all held-out squared errors / n)
  std::vector<FoldDetail> folds;
  arma::vec oof_pred;  // out-of-fold prediction per row
  std::uint64_t fold_hash = 0;
};

// Per fold: fit the scaler on training rows, train with a fold-derived
// seed, predict the held-out rows. Fold R^2 uses the held-out mean; the
// pooled RMSE pools every held-out residual. X is raw unless
// opts.prestandardized.
CvResult cross_validate(const ModelSpec& spec, const arma::mat& X,
                        const arma::vec& y, const FoldSpec& folds,
                        const CvOptions& opts);

// Moran's I of standardized residuals.
MoranResult residual_moran(const arma::vec& residuals, const WeightsMatrix& w,
                           int n_perm, std::uint64_t seed, int threads = 1);

struct MetricBlock {
  double r2 = 0.0;
  double rmse = 0.0;
  double adj_r2 = 0.0;  // ols/gwr only
  double aic = 0.0;     // ols: AIC, gwr: AICc
  std::string provenance;  // "in_sample" or "cv"
};

struct ConditionResult {
  std::vector<std::string> variables;
  int gwr_bandwidth = 0;
  MetricBlock ols;
  MetricBlock gwr;
  MetricBlock rf;
  MetricBlock mlp;
  MoranResult ols_moran;
  MoranResult gwr_moran;
};

struct ComparisonReport {
  std::uint64_t seed = 0;
  int folds_k = 0;
  std::uint64_t fold_hash = 0;
  ConditionResult baseline;
  ConditionResult test;
  std::string ground_truth_fingerprint;  // empty when not synthetic
};

struct Dataset {
  CbgTable cbgs;
  VariableSchema schema;
  std::vector<OutletPoi> outlets;
  VisitTable visits;
  IncidentTable dv_incidents;  // already filtered
};

struct ExperimentOptions {
  std::uint64_t seed = 0;
  int cv_k = 10;
  int n_perm = 999;
  double vif_threshold = 5.0;
  std::vector<std::string> manual_drops;
  RateOptions rates;
  RfConfig rf;
  MlpConfig mlp;
  int gwr_k_min = 0;  // 0: p + 3
  int gwr_k_max = 0;  // 0: n - 1
  bool prestandardized = false;
  int threads = 1;
  std::string ground_truth_fingerprint;
};

struct ExperimentResult {
  ComparisonReport report;
  RateTable rates;
  VifReport vif;
  FeatureMatrix baseline_features;
  FeatureMatrix test_features;
  OlsFit ols_baseline;
  OlsFit ols_test;
  GwrFit gwr_baseline;
  GwrFit gwr_test;
  CvResult rf_baseline;
  CvResult rf_test;
  CvResult mlp_baseline;
  CvResult mlp_test;
};

// Baseline condition: declared variables plus population density, pruned by
// VIF. Test condition: baseline variables plus the four visit rates. Both
// share one fold partition (hashes asserted equal); GWR bandwidth is
// re-searched per condition; RF/MLP seeds are derived per condition.
ExperimentResult run_experiment(const Dataset& data, const ExperimentOptions& opts);

// Everything the exporter needs, serializable so re-export never refits.
struct ExperimentState {
  ComparisonReport comparison;
  std::vector<std::string> cbg_ids;  // eligible units, ascending
  std::vector<Polygon> polygons;
  std::vector<double> dv_rate;
  std::array<std::vector<double>, 4> visit_rates;
  std::vector<double> population_density;
  std::vector<std::string> gwr_names;  // test-condition GWR columns
  std::vector<std::vector<double>> gwr_coef;  // per unit, intercept first
  std::vector<double> gwr_std_resid;
  std::vector<double> gwr_fitted;
  std::vector<double> ols_std_resid;
  std::vector<std::pair<std::string, std::vector<double>>> predictions;
};

ExperimentState make_state(const ExperimentResult& result, const CbgTable& cbgs);
std::string state_to_json(const ExperimentState& state);
ExperimentState state_from_json(const std::string& text, const std::string& origin);
std::string comparison_to_json(const ComparisonReport& report);

// Writes comparison.json, rates.csv, rates.geojson, gwr_local.geojson,
// residuals.geojson, predicted_vs_observed.csv.
void export_report(const ExperimentState& state, const std::filesystem::path& out_dir);

}  // namespace areal
