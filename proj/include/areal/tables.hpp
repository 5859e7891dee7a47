#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "areal/error.hpp"
#include "areal/geo.hpp"

namespace areal {

struct CbgRecord {
  std::string cbg_id;
  Polygon polygon;
  std::int64_t population = 0;
  std::int64_t device_count = 0;
  double area_km2 = 0.0;     // supplied or derived downstream
  bool area_supplied = false;
  std::map<std::string, double> attributes;  // declared numeric columns
};

// Rows are kept sorted by ascending cbg_id; every consumer sees the same
// canonical order.
struct CbgTable {
  std::vector<CbgRecord> rows;

  const CbgRecord* find(const std::string& cbg_id) const;
  std::size_t index_of(const std::string& cbg_id) const;  // throws if absent
};

struct PoiRecord {
  std::string poi_id;
  std::string naics;
  Point location;
  std::string category_label;
};

struct PoiTable {
  std::vector<PoiRecord> rows;  // ascending poi_id
};

struct VisitRecord {
  std::string poi_id;
  std::string cbg_id;
  std::int64_t visitor_count = 0;
};

struct VisitTable {
  std::vector<VisitRecord> rows;  // ascending (poi_id, cbg_id)
};

struct IncidentRecord {
  std::string incident_id;
  Point location;
  bool domestic = false;
  std::string primary_type;
  std::string location_description;
};

struct IncidentTable {
  std::vector<IncidentRecord> rows;  // ascending incident_id
};

enum class OutletType { liquor_store, drinking_place, brewery, winery };

inline constexpr std::array<OutletType, 4> kOutletTypes = {
    OutletType::liquor_store, OutletType::drinking_place, OutletType::brewery,
    OutletType::winery};

inline const char* outlet_type_name(OutletType t) {
  switch (t) {
    case OutletType::liquor_store: return "liquor_store";
    case OutletType::drinking_place: return "drinking_place";
    case OutletType::brewery: return "brewery";
    case OutletType::winery: return "winery";
  }
  throw ValidationError("unknown outlet type");
}

inline OutletType outlet_type_from_name(const std::string& name) {
  for (const OutletType t : kOutletTypes) {
    if (name == outlet_type_name(t)) return t;
  }
  throw ValidationError("unknown outlet type name: '" + name + "'");
}

struct OutletPoi {
  PoiRecord poi;
  OutletType type;
};

// One variable's place in the taxonomy used for composition handling and
// reporting.
enum class VarCategory { race, age, disadvantage, instability, urbanicity, visits };

inline const char* var_category_name(VarCategory c) {
  switch (c) {
    case VarCategory::race: return "race";
    case VarCategory::age: return "age";
    case VarCategory::disadvantage: return "disadvantage";
    case VarCategory::instability: return "instability";
    case VarCategory::urbanicity: return "urbanicity";
    case VarCategory::visits: return "visits";
  }
  throw ValidationError("unknown variable category");
}

inline VarCategory var_category_from_name(const std::string& name) {
  for (const VarCategory c :
       {VarCategory::race, VarCategory::age, VarCategory::disadvantage,
        VarCategory::instability, VarCategory::urbanicity, VarCategory::visits}) {
    if (name == var_category_name(c)) return c;
  }
  throw ValidationError("unknown variable category name: '" + name + "'");
}

}  // namespace areal
