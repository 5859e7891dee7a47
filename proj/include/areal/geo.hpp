#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace areal {

struct Point {
  double lon = 0.0;
  double lat = 0.0;
};

using Ring = std::vector<Point>;

// First ring is the shell; the rest are holes fully inside it.
struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

// Even-odd (ray casting) containment; holes subtract. The shell must have
// nonzero area. Points exactly on an edge are resolved arbitrarily here;
// assignment-level tie rules live in assign_points.
bool point_in_polygon(const Point& p, const Polygon& poly);

// Signed shoelace area of a ring in coordinate units (positive when
// counterclockwise).
double ring_signed_area(const Ring& ring);

// Planar area-weighted centroid; holes subtract from both the area and the
// moment. Degenerate (zero net area) polygons are an error.
Point polygon_centroid(const Polygon& poly);

// Great-circle distance in meters on a sphere of radius 6,371,008.8 m.
double haversine_m(const Point& a, const Point& b);

inline constexpr double kEarthRadiusM = 6371008.8;

// Indices of the k nearest points to `from` among `points`, excluding
// `self_index` (pass points.size() to keep all). Ordered by distance, ties
// broken by smaller index.
std::vector<std::size_t> k_nearest(const std::vector<Point>& points,
                                   const Point& from, std::size_t k,
                                   std::size_t self_index);

// Assignment of points to polygons. Polygons are scanned in the order
// given; the first container wins, so callers passing units in ascending id
// order get the documented smallest-id tie break for boundary points. A
// point inside no polygon stays unassigned.
struct AssignmentResult {
  std::vector<std::ptrdiff_t> assignment;  // per point; -1 when unassigned
  std::vector<std::size_t> counts;         // per polygon
  std::size_t unassigned = 0;
};

AssignmentResult assign_points(const std::vector<Point>& points,
                               const std::vector<Polygon>& polygons);

struct WeightedNeighbor {
  std::size_t index;
  double weight;
};

// Row-standardized spatial weights. Rows are sorted by neighbor index; a row
// may be empty for an isolated unit.
struct WeightsMatrix {
  std::string scheme;  // "queen" or "knn"
  int k = 0;           // knn only
  std::vector<std::vector<WeightedNeighbor>> rows;

  std::size_t size() const { return rows.size(); }
  double row_sum(std::size_t i) const;
};

// Queen contiguity: units sharing at least one boundary vertex (exact
// coordinate match) are neighbors. Isolated units keep an empty row.
WeightsMatrix queen_weights(const std::vector<Polygon>& polys);

// Symmetric-free knn weights from centroid distances, each neighbor 1/k.
WeightsMatrix knn_weights(const std::vector<Point>& centroids, int k);

}  // namespace areal
