#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "areal/tables.hpp"

namespace areal {

// One rejected input row: which record and why. Loading never silently
// drops data; accepted + rejected always equals the input row count.
struct RowIssue {
  std::string id;
  std::string message;
};

template <typename T>
struct Loaded {
  T table;
  std::vector<RowIssue> rejected;
  std::size_t input_rows = 0;

  std::size_t accepted() const { return input_rows - rejected.size(); }
};

// Declared per-unit attribute: a numeric property every unit must carry.
struct VariableDecl {
  std::string name;
  VarCategory category;
};

struct CompositionGroup {
  std::vector<std::string> variables;
  std::string reference;  // dropped before any model sees the group
};

// Attribute schema: the declared socioeconomic variables plus optional
// composition groups. Read from the variables file that travels with a
// dataset.
struct VariableSchema {
  std::vector<VariableDecl> variables;
  std::vector<CompositionGroup> composition_groups;
};

VariableSchema parse_variable_schema(const std::string& text, const std::string& origin);
VariableSchema read_variable_schema(const std::filesystem::path& path);
std::string variable_schema_to_string(const VariableSchema& schema);

// Loads the unit polygons file. Structural and schema problems (bad JSON,
// missing/duplicate cbg_id, missing or non-numeric declared attribute,
// missing required counts) throw; per-feature value and ring violations
// reject that feature. Rows come back sorted by cbg_id.
Loaded<CbgTable> load_cbgs(const std::filesystem::path& path,
                           const std::vector<VariableDecl>& declared);
Loaded<CbgTable> parse_cbgs(const std::string& text, const std::string& origin,
                            const std::vector<VariableDecl>& declared);

// poi_id,naics,lon,lat,category_label. Bad coordinate, empty key, malformed
// NAICS, or duplicate poi_id (first kept) rejects the row.
Loaded<PoiTable> load_pois(const std::filesystem::path& path);
Loaded<PoiTable> parse_pois(const std::string& text, const std::string& origin);

// poi_id,cbg_id,visitor_count. Duplicate (poi_id, cbg_id) keeps the first.
Loaded<VisitTable> load_visits(const std::filesystem::path& path);
Loaded<VisitTable> parse_visits(const std::string& text, const std::string& origin);

// incident_id,lon,lat,domestic,primary_type,location_description with
// domestic in {true,false}.
Loaded<IncidentTable> load_incidents(const std::filesystem::path& path);
Loaded<IncidentTable> parse_incidents(const std::string& text, const std::string& origin);

// Keeps POIs whose NAICS code is in `codes` and tags them with the outlet
// type from `naics_map`. A filter code without a type mapping is an error.
std::vector<OutletPoi> filter_alcohol_pois(
    const PoiTable& pois, const std::set<std::string>& codes,
    const std::map<std::string, OutletType>& naics_map);

inline const std::map<std::string, OutletType>& default_naics_map() {
  static const std::map<std::string, OutletType> m = {
      {"445310", OutletType::liquor_store},
      {"722410", OutletType::drinking_place},
      {"312120", OutletType::brewery},
      {"312130", OutletType::winery},
  };
  return m;
}

// Three-stage incident filter. Only rows that are flagged domestic, carry an
// eligible primary type, and occurred at a home location survive.
struct DvFilterResult {
  IncidentTable kept;
  std::size_t input = 0;
  std::size_t removed_not_domestic = 0;
  std::size_t removed_type = 0;      // domestic but ineligible primary type
  std::size_t removed_location = 0;  // eligible type but not a home location
};

DvFilterResult filter_dv_incidents(const IncidentTable& incidents,
                                   const std::set<std::string>& dv_types,
                                   const std::set<std::string>& home_locations);

inline const std::set<std::string>& default_dv_types() {
  static const std::set<std::string> s = {
      "ASSAULT", "BATTERY", "CRIMINAL DAMAGE", "INTIMIDATION", "STALKING"};
  return s;
}

inline const std::set<std::string>& default_home_locations() {
  static const std::set<std::string> s = {"Residence", "Apartment",
                                          "Driveway - Residential"};
  return s;
}

// Referential consistency between files: visit rows must point at known
// POIs and known units.
struct LinkReport {
  std::size_t unknown_poi_rows = 0;
  std::size_t unknown_cbg_rows = 0;
  std::vector<std::string> sample_unknown_pois;  // up to 5, sorted unique
  std::vector<std::string> sample_unknown_cbgs;

  bool clean() const { return unknown_poi_rows == 0 && unknown_cbg_rows == 0; }
};

LinkReport link_check(const CbgTable& cbgs, const PoiTable& pois,
                      const VisitTable& visits);

}  // namespace areal
