#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "areal/mlmod.hpp"
#include "areal/rates.hpp"

namespace areal {

// One JSON document drives every command; flags override config fields,
// defaults fill the rest. Seeds are always explicit (never wall clock).
struct PipelineConfig {
  std::filesystem::path cbgs;
  std::filesystem::path pois;
  std::filesystem::path visits;
  std::filesystem::path incidents;
  std::filesystem::path variables;
  std::filesystem::path out = "out";
  std::filesystem::path state;  // experiment state for `export`; defaults to <out>/experiment_state.json

  std::uint64_t seed = 0;
  int threads = 1;
  bool verbose = false;

  std::vector<std::string> naics_codes;      // default: the four outlet codes
  std::vector<std::string> dv_types;         // default allowlist
  std::vector<std::string> home_locations;   // default allowlist

  RateOptions rates;

  std::string weights_scheme = "queen";  // "queen" | "knn"
  int weights_k = 8;
  int moran_n_perm = 999;
  std::string moran_variable = "dv_rate";

  double vif_threshold = 5.0;
  std::vector<std::string> manual_drops;

  // Modeling variable list; empty means every declared variable plus
  // population density. Visit rates are appended when include_visit_rates.
  std::vector<std::string> model_variables;
  bool include_visit_rates = true;

  int gwr_k_min = 0;       // 0: derived from column count
  int gwr_k_max = 0;       // 0: n - 1
  int gwr_bandwidth = 0;   // > 0 skips the search
  bool gwr_force_uniform = false;
  double gwr_fixed_bandwidth_m = 0.0;

  RfConfig rf;
  bool rf_grid = false;  // grid-search (n_tree x m_try rule) before fitting
  MlpConfig mlp;

  int cv_k = 10;
  std::string cv_model = "rf";  // "rf" | "mlp"
  bool prestandardized = false;

  nlohmann::json synth = nlohmann::json::object();  // generator spec passthrough
};

PipelineConfig default_config();
PipelineConfig config_from_json(const std::string& text, const std::string& origin);
// Full echo with every default materialized; reparsing reproduces the
// identical configuration.
nlohmann::json config_to_json(const PipelineConfig& cfg);
std::string resolved_config_text(const PipelineConfig& cfg);

}  // namespace areal
