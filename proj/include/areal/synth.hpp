#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "areal/ingest.hpp"
#include "areal/tables.hpp"

namespace areal {

// Scalar field over the unit square (u = west->east, v = south->north).
// gradient: lo..hi along a direction; radial: hi at the center falling
// linearly to lo at the farthest corner.
struct FieldSpec {
  enum class Kind { constant, gradient, radial };
  Kind kind = Kind::constant;
  double value = 0.0;   // constant
  double lo = 0.0;      // gradient / radial
  double hi = 0.0;
  double dir_u = 1.0;   // gradient direction (need not be normalized)
  double dir_v = 0.0;
  double center_u = 0.5;  // radial center
  double center_v = 0.5;

  double eval(double u, double v) const;
};

struct SynthVariable {
  std::string name;
  VarCategory category = VarCategory::disadvantage;
  FieldSpec field;
  double noise_sd = 0.0;
};

// Share variables that sum to exactly 100 per unit (e.g. race shares):
// positive intensity fields are drawn, then normalized. The reference name
// is advertised in the emitted schema for stage-1 VIF drops.
struct SynthComposition {
  std::vector<std::string> names;
  VarCategory category = VarCategory::race;
  std::vector<FieldSpec> fields;
  std::vector<double> noise_sd;
  std::string reference;
};

struct SynthVisitField {
  FieldSpec field;
  double noise_sd = 0.0;
};

// Coefficient applied to the named standardized feature column.
struct BetaSpec {
  std::string variable;
  FieldSpec field;
};

struct SynthConfig {
  int grid_rows = 20;
  int grid_cols = 20;
  double cell_deg = 0.01;
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  std::uint64_t seed = 0;
  std::int64_t pop_min = 500;
  std::int64_t pop_max = 3000;
  double device_frac_min = 0.05;
  double device_frac_max = 0.25;
  int pois_per_type = 12;
  int extra_pois = 10;  // non-alcohol POIs, exercise the NAICS filter
  std::vector<SynthVariable> variables;
  std::vector<SynthComposition> compositions;
  std::array<SynthVisitField, 4> visit_fields;  // kOutletTypes order
  FieldSpec beta0;
  std::vector<BetaSpec> betas;
  double noise_sd = 0.5;        // dv-rate noise
  double decoy_fraction = 0.3;  // decoy incidents per true incident
  bool poisson_counts = false;  // default: deterministic rounding
  double max_clip_fraction = 0.5;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<std::string> cbg_ids;
  // Per-unit coefficient fields on standardized columns; key "intercept"
  // plus one entry per wired variable.
  std::map<std::string, std::vector<double>> beta;
  std::vector<double> rate_noiseless;   // clipped at 0
  std::vector<double> rate_intended;    // noise added, clipped at 0
  std::map<std::string, std::vector<double>> intended_visit_rates;
  std::size_t clipped_units = 0;
};

// Everything `generate` produces, both as in-memory tables and as the file
// payloads written by the CLI.
struct SynthDataset {
  CbgTable cbgs;
  PoiTable pois;
  VisitTable visits;
  IncidentTable incidents;
  VariableSchema schema;
  GroundTruth truth;
};

// Deterministic generation: same (config, seed) gives byte-identical files.
SynthDataset generate(const SynthConfig& config);

// Writes cbgs.geojson, pois.csv, visits.csv, incidents.csv, variables.json,
// and ground_truth.json into out_dir.
void write_dataset(const SynthDataset& dataset, const std::filesystem::path& out_dir);

std::string ground_truth_to_json(const GroundTruth& truth);

// Generator spec document: either {"preset": "paper-like" | "heterogeneous",
// "seed": u64} with optional scalar overrides, or the full field set as
// echoed by synth_config_to_json.
SynthConfig synth_config_from_json(const std::string& text, const std::string& origin);
nlohmann::json synth_config_to_json(const SynthConfig& config);

// Preset mirroring the qualitative structure the toolkit must replicate:
// positive liquor-store effect, negative drinking-place and brewery effects,
// null winery effect, spatially structured confounders, a composition group,
// and a collinear pair for the pruning stages.
SynthConfig scenario_paper_like(std::uint64_t seed);

// Preset for spatial-heterogeneity studies: the liquor-store effect flips
// sign west to east, the income and drinking-place effects fade along their
// own axes, and the intercept climbs along the diagonal.
SynthConfig scenario_heterogeneous(std::uint64_t seed);

}  // namespace areal
