#include "areal/geojson.hpp"

#include "areal/error.hpp"
#include "areal/io.hpp"
#include "areal/text.hpp"

namespace areal {

namespace {

using nlohmann::json;

std::string feature_label(const json& feature, const std::string& id_property,
                          std::size_t index) {
  if (feature.is_object() && feature.contains("properties") &&
      feature["properties"].is_object() &&
      feature["properties"].contains(id_property) &&
      feature["properties"][id_property].is_string()) {
    return "feature '" + feature["properties"][id_property].get<std::string>() + "'";
  }
  return "feature #" + fmt_int(static_cast<std::int64_t>(index));
}

Ring parse_ring(const json& arr, const std::string& origin, const std::string& label) {
  if (!arr.is_array()) {
    throw ValidationError(origin + ": " + label + ": ring must be an array");
  }
  Ring ring;
  ring.reserve(arr.size());
  for (const auto& pos : arr) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() ||
        !pos[1].is_number()) {
      throw ValidationError(origin + ": " + label +
                            ": ring position must be [lon, lat]");
    }
    ring.push_back(Point{pos[0].get<double>(), pos[1].get<double>()});
  }
  return ring;
}

}  // namespace

std::vector<GeoFeature> parse_feature_collection(const std::string& text,
                                                 const std::string& origin,
                                                 const std::string& id_property) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ValidationError(origin + ": document must be a FeatureCollection");
  }

  std::vector<GeoFeature> out;
  out.reserve(doc["features"].size());
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    const std::string label = feature_label(f, id_property, index);
    ++index;
    if (!f.is_object() || f.value("type", "") != "Feature") {
      throw ValidationError(origin + ": " + label + ": not a Feature object");
    }
    if (!f.contains("properties") || !f["properties"].is_object()) {
      throw ValidationError(origin + ": " + label + ": missing properties object");
    }
    if (!f.contains("geometry") || !f["geometry"].is_object()) {
      throw ValidationError(origin + ": " + label + ": missing geometry");
    }
    const json& g = f["geometry"];
    if (g.value("type", "") != "Polygon") {
      throw ValidationError(origin + ": " + label + ": geometry type must be Polygon");
    }
    if (!g.contains("coordinates") || !g["coordinates"].is_array() ||
        g["coordinates"].empty()) {
      throw ValidationError(origin + ": " + label + ": Polygon needs coordinate rings");
    }
    GeoFeature feat;
    feat.properties = f["properties"];
    const json& rings = g["coordinates"];
    feat.polygon.outer = parse_ring(rings[0], origin, label);
    for (std::size_t r = 1; r < rings.size(); ++r) {
      feat.polygon.holes.push_back(parse_ring(rings[r], origin, label));
    }
    out.push_back(std::move(feat));
  }
  return out;
}

std::vector<GeoFeature> read_feature_collection(const std::filesystem::path& path,
                                                const std::string& id_property) {
  return parse_feature_collection(read_file(path), path.string(), id_property);
}

Polygon polygon_from_geojson(const nlohmann::json& geometry,
                             const std::string& context) {
  if (!geometry.is_object() || geometry.value("type", "") != "Polygon" ||
      !geometry.contains("coordinates") || !geometry["coordinates"].is_array() ||
      geometry["coordinates"].empty()) {
    throw ValidationError(context + ": geometry must be a Polygon with rings");
  }
  const json& rings = geometry["coordinates"];
  Polygon poly;
  poly.outer = parse_ring(rings[0], context, "outer ring");
  for (std::size_t r = 1; r < rings.size(); ++r) {
    poly.holes.push_back(parse_ring(rings[r], context, "hole"));
  }
  return poly;
}

nlohmann::json polygon_to_geojson(const Polygon& poly) {
  json coords = json::array();
  auto ring_json = [](const Ring& ring) {
    json arr = json::array();
    for (const Point& p : ring) arr.push_back(json::array({p.lon, p.lat}));
    return arr;
  };
  coords.push_back(ring_json(poly.outer));
  for (const auto& hole : poly.holes) coords.push_back(ring_json(hole));
  return json{{"type", "Polygon"}, {"coordinates", coords}};
}

std::string feature_collection_to_string(const std::vector<GeoFeature>& features) {
  json doc;
  doc["type"] = "FeatureCollection";
  json arr = json::array();
  for (const auto& f : features) {
    arr.push_back(json{{"type", "Feature"},
                       {"properties", f.properties},
                       {"geometry", polygon_to_geojson(f.polygon)}});
  }
  doc["features"] = std::move(arr);
  return doc.dump(2) + "\n";
}

}  // namespace areal
