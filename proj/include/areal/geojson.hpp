#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "areal/geo.hpp"

namespace areal {

struct GeoFeature {
  nlohmann::json properties;  // object
  Polygon polygon;
};

// Parses a FeatureCollection of Polygon features. Structural problems
// (wrong top-level type, non-Polygon geometry, malformed coordinate arrays)
// throw ValidationError naming the offending feature by `id_property` when
// available, by position otherwise. Ring-level value checks (closure,
// minimum length) are left to callers so they can reject individual rows.
std::vector<GeoFeature> parse_feature_collection(const std::string& text,
                                                 const std::string& origin,
                                                 const std::string& id_property);

std::vector<GeoFeature> read_feature_collection(const std::filesystem::path& path,
                                                const std::string& id_property);

nlohmann::json polygon_to_geojson(const Polygon& poly);

// Inverse of polygon_to_geojson; `context` prefixes error messages.
Polygon polygon_from_geojson(const nlohmann::json& geometry,
                             const std::string& context);

// Serializes features into a FeatureCollection document (2-space indent,
// sorted keys, trailing newline), byte-stable for identical inputs.
std::string feature_collection_to_string(const std::vector<GeoFeature>& features);

}  // namespace areal
