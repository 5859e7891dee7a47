#include "areal/ingest.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "areal/csv.hpp"
#include "areal/geojson.hpp"
#include "areal/io.hpp"
#include "areal/text.hpp"

namespace areal {

using nlohmann::json;

const CbgRecord* CbgTable::find(const std::string& cbg_id) const {
  const auto it = std::lower_bound(
      rows.begin(), rows.end(), cbg_id,
      [](const CbgRecord& r, const std::string& id) { return r.cbg_id < id; });
  if (it == rows.end() || it->cbg_id != cbg_id) return nullptr;
  return &*it;
}

std::size_t CbgTable::index_of(const std::string& cbg_id) const {
  const CbgRecord* r = find(cbg_id);
  if (!r) throw ValidationError("unknown cbg_id: '" + cbg_id + "'");
  return static_cast<std::size_t>(r - rows.data());
}

VariableSchema parse_variable_schema(const std::string& text,
                                     const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_array()) {
    throw ValidationError(origin + ": expected object with a 'variables' array");
  }
  VariableSchema schema;
  std::set<std::string> seen;
  for (const auto& v : doc["variables"]) {
    if (!v.is_object() || !v.contains("name") || !v["name"].is_string() ||
        !v.contains("category") || !v["category"].is_string()) {
      throw ValidationError(origin + ": each variable needs 'name' and 'category'");
    }
    VariableDecl decl;
    decl.name = v["name"].get<std::string>();
    decl.category = var_category_from_name(v["category"].get<std::string>());
    if (!seen.insert(decl.name).second) {
      throw ValidationError(origin + ": duplicate variable '" + decl.name + "'");
    }
    schema.variables.push_back(std::move(decl));
  }
  if (doc.contains("composition_groups")) {
    if (!doc["composition_groups"].is_array()) {
      throw ValidationError(origin + ": 'composition_groups' must be an array");
    }
    for (const auto& g : doc["composition_groups"]) {
      if (!g.is_object() || !g.contains("variables") || !g["variables"].is_array() ||
          !g.contains("reference") || !g["reference"].is_string()) {
        throw ValidationError(origin +
                              ": composition group needs 'variables' and 'reference'");
      }
      CompositionGroup group;
      for (const auto& name : g["variables"]) {
        if (!name.is_string()) {
          throw ValidationError(origin + ": composition group variables must be strings");
        }
        group.variables.push_back(name.get<std::string>());
      }
      group.reference = g["reference"].get<std::string>();
      if (std::find(group.variables.begin(), group.variables.end(), group.reference) ==
          group.variables.end()) {
        throw ValidationError(origin + ": composition reference '" + group.reference +
                              "' is not in its group");
      }
      schema.composition_groups.push_back(std::move(group));
    }
  }
  return schema;
}

VariableSchema read_variable_schema(const std::filesystem::path& path) {
  return parse_variable_schema(read_file(path), path.string());
}

std::string variable_schema_to_string(const VariableSchema& schema) {
  json doc;
  json vars = json::array();
  for (const auto& v : schema.variables) {
    vars.push_back(json{{"name", v.name}, {"category", var_category_name(v.category)}});
  }
  doc["variables"] = std::move(vars);
  json groups = json::array();
  for (const auto& g : schema.composition_groups) {
    groups.push_back(json{{"variables", g.variables}, {"reference", g.reference}});
  }
  doc["composition_groups"] = std::move(groups);
  return doc.dump(2) + "\n";
}

namespace {

bool ring_closed(const Ring& ring) {
  return ring.size() >= 2 && ring.front().lon == ring.back().lon &&
         ring.front().lat == ring.back().lat;
}

// Returns an empty string when the polygon is usable, otherwise the reason.
std::string check_polygon(const Polygon& poly) {
  auto check_ring = [](const Ring& ring, const char* what) -> std::string {
    if (ring.size() < 4) return std::string(what) + " has fewer than 4 positions";
    if (!ring_closed(ring)) return std::string(what) + " is not closed";
    return "";
  };
  std::string msg = check_ring(poly.outer, "outer ring");
  if (!msg.empty()) return msg;
  for (std::size_t h = 0; h < poly.holes.size(); ++h) {
    msg = check_ring(poly.holes[h], "hole ring");
    if (!msg.empty()) return msg;
  }
  if (ring_signed_area(poly.outer) == 0.0) return "outer ring has zero area";
  return "";
}

bool coords_valid(double lon, double lat) {
  return lon >= -180.0 && lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
}

// Required integer property; nullopt-style via bool return keeps structural
// issues (missing/typed wrong) distinct from value violations.
std::int64_t require_count(const json& props, const std::string& key,
                           const std::string& origin, const std::string& label) {
  if (!props.contains(key) || !props[key].is_number_integer()) {
    throw ValidationError(origin + ": " + label + ": missing integer property '" +
                          key + "'");
  }
  return props[key].get<std::int64_t>();
}

}  // namespace

Loaded<CbgTable> parse_cbgs(const std::string& text, const std::string& origin,
                            const std::vector<VariableDecl>& declared) {
  const auto features = parse_feature_collection(text, origin, "cbg_id");
  Loaded<CbgTable> out;
  out.input_rows = features.size();
  std::set<std::string> seen_ids;

  std::size_t index = 0;
  for (const auto& f : features) {
    const std::string label = "feature #" + fmt_int(static_cast<std::int64_t>(index));
    ++index;
    const json& props = f.properties;
    if (!props.contains("cbg_id") || !props["cbg_id"].is_string()) {
      throw ValidationError(origin + ": " + label + ": missing string property 'cbg_id'");
    }
    CbgRecord rec;
    rec.cbg_id = props["cbg_id"].get<std::string>();
    if (!seen_ids.insert(rec.cbg_id).second) {
      throw ValidationError(origin + ": duplicate cbg_id '" + rec.cbg_id + "'");
    }
    rec.population = require_count(props, "population", origin, "feature '" + rec.cbg_id + "'");
    rec.device_count = require_count(props, "device_count", origin, "feature '" + rec.cbg_id + "'");
    for (const auto& decl : declared) {
      if (!props.contains(decl.name) || !props[decl.name].is_number()) {
        throw ValidationError(origin + ": feature '" + rec.cbg_id +
                              "': missing numeric attribute '" + decl.name + "'");
      }
      rec.attributes[decl.name] = props[decl.name].get<double>();
    }

    // Value-level checks reject the row instead of failing the file.
    std::string reason;
    if (rec.population < 0) {
      reason = "population must be nonnegative";
    } else if (rec.device_count < 0) {
      reason = "device_count must be nonnegative";
    } else {
      reason = check_polygon(f.polygon);
    }
    if (reason.empty() && props.contains("area_km2")) {
      if (!props["area_km2"].is_number()) {
        throw ValidationError(origin + ": feature '" + rec.cbg_id +
                              "': area_km2 must be numeric");
      }
      rec.area_km2 = props["area_km2"].get<double>();
      rec.area_supplied = true;
      if (!(rec.area_km2 > 0.0)) reason = "area_km2 must be positive";
    }
    if (!reason.empty()) {
      out.rejected.push_back({rec.cbg_id, "feature '" + rec.cbg_id + "': " + reason});
      continue;
    }
    rec.polygon = f.polygon;
    out.table.rows.push_back(std::move(rec));
  }

  std::sort(out.table.rows.begin(), out.table.rows.end(),
            [](const CbgRecord& a, const CbgRecord& b) { return a.cbg_id < b.cbg_id; });
  return out;
}

Loaded<CbgTable> load_cbgs(const std::filesystem::path& path,
                           const std::vector<VariableDecl>& declared) {
  return parse_cbgs(read_file(path), path.string(), declared);
}

namespace {

bool valid_naics(const std::string& s) {
  if (s.size() < 2 || s.size() > 6) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Loaded<PoiTable> parse_pois(const std::string& text, const std::string& origin) {
  const CsvTable csv = parse_csv(text, origin);
  const std::size_t c_id = csv.col("poi_id");
  const std::size_t c_naics = csv.col("naics");
  const std::size_t c_lon = csv.col("lon");
  const std::size_t c_lat = csv.col("lat");
  const std::size_t c_label = csv.col("category_label");

  Loaded<PoiTable> out;
  out.input_rows = csv.rows.size();
  std::set<std::string> seen;
  for (const auto& row : csv.rows) {
    if (row.size() != csv.header.size()) {
      out.rejected.push_back(
          {row.empty() ? "" : row[0], "row has " + fmt_int((std::int64_t)row.size()) +
                                          " fields, header has " +
                                          fmt_int((std::int64_t)csv.header.size())});
      continue;
    }
    PoiRecord rec;
    rec.poi_id = row[c_id];
    std::string reason;
    double lon = 0, lat = 0;
    if (rec.poi_id.empty()) {
      reason = "empty poi_id";
    } else if (!seen.insert(rec.poi_id).second) {
      reason = "duplicate poi_id (first occurrence kept)";
    } else if (!valid_naics(row[c_naics])) {
      reason = "naics must be 2-6 digits, got '" + row[c_naics] + "'";
    } else if (!try_parse_double(row[c_lon], lon) || !try_parse_double(row[c_lat], lat)) {
      reason = "lon/lat must be numeric";
    } else if (!coords_valid(lon, lat)) {
      reason = "lon/lat out of range";
    }
    if (!reason.empty()) {
      out.rejected.push_back({rec.poi_id, "poi '" + rec.poi_id + "': " + reason});
      continue;
    }
    rec.naics = row[c_naics];
    rec.location = Point{lon, lat};
    rec.category_label = row[c_label];
    out.table.rows.push_back(std::move(rec));
  }
  std::sort(out.table.rows.begin(), out.table.rows.end(),
            [](const PoiRecord& a, const PoiRecord& b) { return a.poi_id < b.poi_id; });
  return out;
}

Loaded<PoiTable> load_pois(const std::filesystem::path& path) {
  return parse_pois(read_file(path), path.string());
}

Loaded<VisitTable> parse_visits(const std::string& text, const std::string& origin) {
  const CsvTable csv = parse_csv(text, origin);
  const std::size_t c_poi = csv.col("poi_id");
  const std::size_t c_cbg = csv.col("cbg_id");
  const std::size_t c_count = csv.col("visitor_count");

  Loaded<VisitTable> out;
  out.input_rows = csv.rows.size();
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : csv.rows) {
    if (row.size() != csv.header.size()) {
      out.rejected.push_back(
          {row.empty() ? "" : row[0], "row has " + fmt_int((std::int64_t)row.size()) +
                                          " fields, header has " +
                                          fmt_int((std::int64_t)csv.header.size())});
      continue;
    }
    VisitRecord rec;
    rec.poi_id = row[c_poi];
    rec.cbg_id = row[c_cbg];
    const std::string key_label = "visit (" + rec.poi_id + ", " + rec.cbg_id + ")";
    std::string reason;
    if (rec.poi_id.empty() || rec.cbg_id.empty()) {
      reason = "empty poi_id or cbg_id";
    } else if (!seen.insert({rec.poi_id, rec.cbg_id}).second) {
      reason = "duplicate (poi_id, cbg_id) pair (first occurrence kept)";
    } else if (!try_parse_int(row[c_count], rec.visitor_count)) {
      reason = "visitor_count must be an integer, got '" + row[c_count] + "'";
    } else if (rec.visitor_count < 0) {
      reason = "visitor_count must be nonnegative";
    }
    if (!reason.empty()) {
      out.rejected.push_back({rec.poi_id, key_label + ": " + reason});
      continue;
    }
    out.table.rows.push_back(std::move(rec));
  }
  std::sort(out.table.rows.begin(), out.table.rows.end(),
            [](const VisitRecord& a, const VisitRecord& b) {
              if (a.poi_id != b.poi_id) return a.poi_id < b.poi_id;
              return a.cbg_id < b.cbg_id;
            });
  return out;
}

Loaded<VisitTable> load_visits(const std::filesystem::path& path) {
  return parse_visits(read_file(path), path.string());
}

Loaded<IncidentTable> parse_incidents(const std::string& text, const std::string& origin) {
  const CsvTable csv = parse_csv(text, origin);
  const std::size_t c_id = csv.col("incident_id");
  const std::size_t c_lon = csv.col("lon");
  const std::size_t c_lat = csv.col("lat");
  const std::size_t c_dom = csv.col("domestic");
  const std::size_t c_type = csv.col("primary_type");
  const std::size_t c_loc = csv.col("location_description");

  Loaded<IncidentTable> out;
  out.input_rows = csv.rows.size();
  std::set<std::string> seen;
  for (const auto& row : csv.rows) {
    if (row.size() != csv.header.size()) {
      out.rejected.push_back(
          {row.empty() ? "" : row[0], "row has " + fmt_int((std::int64_t)row.size()) +
                                          " fields, header has " +
                                          fmt_int((std::int64_t)csv.header.size())});
      continue;
    }
    IncidentRecord rec;
    rec.incident_id = row[c_id];
    std::string reason;
    double lon = 0, lat = 0;
    if (rec.incident_id.empty()) {
      reason = "empty incident_id";
    } else if (!seen.insert(rec.incident_id).second) {
      reason = "duplicate incident_id (first occurrence kept)";
    } else if (!try_parse_double(row[c_lon], lon) || !try_parse_double(row[c_lat], lat)) {
      reason = "lon/lat must be numeric";
    } else if (!coords_valid(lon, lat)) {
      reason = "lon/lat out of range";
    } else if (row[c_dom] != "true" && row[c_dom] != "false") {
      reason = "domestic must be 'true' or 'false', got '" + row[c_dom] + "'";
    }
    if (!reason.empty()) {
      out.rejected.push_back(
          {rec.incident_id, "incident '" + rec.incident_id + "': " + reason});
      continue;
    }
    rec.location = Point{lon, lat};
    rec.domestic = row[c_dom] == "true";
    rec.primary_type = row[c_type];
    rec.location_description = row[c_loc];
    out.table.rows.push_back(std::move(rec));
  }
  std::sort(out.table.rows.begin(), out.table.rows.end(),
            [](const IncidentRecord& a, const IncidentRecord& b) {
              return a.incident_id < b.incident_id;
            });
  return out;
}

Loaded<IncidentTable> load_incidents(const std::filesystem::path& path) {
  return parse_incidents(read_file(path), path.string());
}

std::vector<OutletPoi> filter_alcohol_pois(
    const PoiTable& pois, const std::set<std::string>& codes,
    const std::map<std::string, OutletType>& naics_map) {
  for (const auto& code : codes) {
    if (naics_map.find(code) == naics_map.end()) {
      throw ValidationError("filter code '" + code + "' has no outlet type mapping");
    }
  }
  std::vector<OutletPoi> out;
  for (const auto& poi : pois.rows) {
    if (codes.find(poi.naics) == codes.end()) continue;
    out.push_back({poi, naics_map.at(poi.naics)});
  }
  return out;
}

DvFilterResult filter_dv_incidents(const IncidentTable& incidents,
                                   const std::set<std::string>& dv_types,
                                   const std::set<std::string>& home_locations) {
  DvFilterResult res;
  res.input = incidents.rows.size();
  for (const auto& inc : incidents.rows) {
    if (!inc.domestic) {
      ++res.removed_not_domestic;
      continue;
    }
    if (dv_types.find(inc.primary_type) == dv_types.end()) {
      ++res.removed_type;
      continue;
    }
    if (home_locations.find(inc.location_description) == home_locations.end()) {
      ++res.removed_location;
      continue;
    }
    res.kept.rows.push_back(inc);
  }
  return res;
}

LinkReport link_check(const CbgTable& cbgs, const PoiTable& pois,
                      const VisitTable& visits) {
  std::set<std::string> poi_ids;
  for (const auto& p : pois.rows) poi_ids.insert(p.poi_id);

  LinkReport rep;
  std::set<std::string> bad_pois;
  std::set<std::string> bad_cbgs;
  for (const auto& v : visits.rows) {
    if (poi_ids.find(v.poi_id) == poi_ids.end()) {
      ++rep.unknown_poi_rows;
      bad_pois.insert(v.poi_id);
    }
    if (cbgs.find(v.cbg_id) == nullptr) {
      ++rep.unknown_cbg_rows;
      bad_cbgs.insert(v.cbg_id);
    }
  }
  for (const auto& id : bad_pois) {
    if (rep.sample_unknown_pois.size() >= 5) break;
    rep.sample_unknown_pois.push_back(id);
  }
  for (const auto& id : bad_cbgs) {
    if (rep.sample_unknown_cbgs.size() >= 5) break;
    rep.sample_unknown_cbgs.push_back(id);
  }
  return rep;
}

}  // namespace areal
