#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <armadillo>

#include "areal/ingest.hpp"
#include "areal/tables.hpp"

namespace areal {

// Unit area in km^2: the supplied value when present, otherwise a local
// equirectangular approximation of the polygon's spherical area.
double cbg_area_km2(const CbgRecord& rec);

// Incidents per 1,000 residents.
double dv_rate_value(std::int64_t incident_count, std::int64_t population);

// Visitors per panel device.
double visit_rate_value(std::int64_t visitor_sum, std::int64_t device_count);

// Sums visitor counts into (unit, outlet type) cells. Visit rows pointing at
// POIs outside the outlet set are ignored; rows pointing at unknown units
// are counted in `skipped_unknown_cbg` for the caller to surface.
struct VisitSums {
  std::map<std::string, std::array<std::int64_t, 4>> by_cbg;
  std::size_t skipped_unknown_cbg = 0;
  std::size_t skipped_non_outlet = 0;
};

VisitSums reverse_visits(const VisitTable& visits,
                         const std::vector<OutletPoi>& outlets,
                         const CbgTable& cbgs);

struct RateRow {
  std::string cbg_id;
  double dv_rate = 0.0;
  std::array<double, 4> visit_rate{};  // indexed by kOutletTypes order
  double population_density = 0.0;     // residents per km^2
};

struct RateExclusion {
  std::string cbg_id;
  std::string reason;
  bool nonzero_incidents_dropped = false;  // flagged when incidents were lost
};

// The modeling set: one row per eligible unit, ascending cbg_id. Excluded
// units are listed with reasons; eligible + excluded covers every unit.
struct RateTable {
  std::vector<RateRow> rows;
  std::vector<RateExclusion> excluded;
  std::size_t assigned_incidents = 0;
  std::size_t unassigned_incidents = 0;

  std::size_t index_of(const std::string& cbg_id) const;  // throws if absent
};

struct RateOptions {
  std::int64_t min_pop = 1;
  std::int64_t min_devices = 1;
};

// Full derivation: assign filtered incidents to units, aggregate visits,
// and compute the per-unit rate block.
RateTable derive_rates(const CbgTable& cbgs, const std::vector<OutletPoi>& outlets,
                       const VisitTable& visits, const IncidentTable& dv_incidents,
                       const RateOptions& opts);

std::vector<std::string> rate_csv_header();
std::string rate_table_to_csv(const RateTable& rates);
RateTable rate_table_from_csv(const std::string& text, const std::string& origin);

// Names of the derived variables appended after the declared attributes.
inline const char* kPopulationDensityVar = "population_density";
inline std::vector<std::string> visit_rate_variable_names() {
  std::vector<std::string> names;
  for (const OutletType t : kOutletTypes) {
    names.push_back(std::string(outlet_type_name(t)) + "_vr");
  }
  return names;
}

// Category lookup across declared attributes and derived variables.
VarCategory category_of(const std::string& name, const VariableSchema& schema);

// Column-standardized design block. `values` holds z-scores; the scaler
// (per-column mean and population standard deviation) is kept so raw values
// can be recovered exactly.
struct FeatureMatrix {
  std::vector<std::string> row_ids;    // ascending cbg_id
  std::vector<VariableDecl> columns;
  arma::mat values;                    // n x p, standardized
  arma::vec col_mean;
  arma::vec col_scale;                 // population std, strictly positive
  arma::vec target;                    // dv_rate, raw units

  std::size_t col_index(const std::string& name) const;  // throws if absent
  arma::mat raw() const;
  std::vector<std::string> column_names() const;
};

// Builds the modeling matrix over the eligible units: the requested
// variables in the order given (declared attributes or population_density),
// then the four visit-rate columns when `include_visits` is set. A constant
// column is an error naming the column.
FeatureMatrix assemble_features(const CbgTable& cbgs, const RateTable& rates,
                                const std::vector<std::string>& variables,
                                const VariableSchema& schema, bool include_visits);

}  // namespace areal
