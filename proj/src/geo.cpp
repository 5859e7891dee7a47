#include "areal/geo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "areal/error.hpp"
#include "areal/text.hpp"

namespace areal {

namespace {

// Crossing-number test for one ring (boundary points resolve arbitrarily).
bool ring_contains(const Ring& ring, const Point& p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x_cross =
          (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

double ring_signed_area(const Ring& ring) {
  double acc = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    acc += ring[j].lon * ring[i].lat - ring[i].lon * ring[j].lat;
  }
  return acc / 2.0;
}

bool point_in_polygon(const Point& p, const Polygon& poly) {
  if (poly.outer.size() < 4 || ring_signed_area(poly.outer) == 0.0) {
    throw NumericError("geo: degenerate polygon (zero-area shell)");
  }
  // Pure even-odd across all rings: holes flip containment back off.
  bool inside = ring_contains(poly.outer, p);
  for (const auto& hole : poly.holes) inside ^= ring_contains(hole, p);
  return inside;
}

namespace {

struct RingMoment {
  double area;  // signed
  double mx;    // integral of lon dA
  double my;    // integral of lat dA
};

RingMoment ring_moment(const Ring& ring) {
  RingMoment m{0.0, 0.0, 0.0};
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double cross = ring[j].lon * ring[i].lat - ring[i].lon * ring[j].lat;
    m.area += cross;
    m.mx += (ring[j].lon + ring[i].lon) * cross;
    m.my += (ring[j].lat + ring[i].lat) * cross;
  }
  m.area /= 2.0;
  m.mx /= 6.0;
  m.my /= 6.0;
  return m;
}

}  // namespace

Point polygon_centroid(const Polygon& poly) {
  RingMoment outer = ring_moment(poly.outer);
  // Normalize so the shell contributes positive area and every hole
  // negative, regardless of winding direction.
  double sign = outer.area < 0 ? -1.0 : 1.0;
  double area = sign * outer.area;
  double mx = sign * outer.mx;
  double my = sign * outer.my;
  for (const auto& hole : poly.holes) {
    RingMoment hm = ring_moment(hole);
    const double hsign = hm.area < 0 ? -1.0 : 1.0;
    area -= hsign * hm.area;
    mx -= hsign * hm.mx;
    my -= hsign * hm.my;
  }
  if (area <= 0.0) {
    throw NumericError("geo: centroid of degenerate polygon (nonpositive area)");
  }
  return Point{mx / area, my / area};
}

double haversine_m(const Point& a, const Point& b) {
  constexpr double kDegToRad = M_PI / 180.0;
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<std::size_t> k_nearest(const std::vector<Point>& points,
                                   const Point& from, std::size_t k,
                                   std::size_t self_index) {
  const std::size_t n = points.size();
  const std::size_t available = self_index < n ? n - 1 : n;
  if (k > available) {
    throw ValidationError("geo: k_nearest requested " + fmt_int((std::int64_t)k) +
                          " neighbors but only " + fmt_int((std::int64_t)available) +
                          " candidates exist");
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(available);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == self_index) continue;
    dist.emplace_back(haversine_m(points[i], from), i);
  }
  std::sort(dist.begin(), dist.end());  // pair ordering breaks ties by index
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

namespace {

struct Bbox {
  double min_lon, min_lat, max_lon, max_lat;

  bool contains(const Point& p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat &&
           p.lat <= max_lat;
  }
};

Bbox polygon_bbox(const Polygon& poly) {
  Bbox b{poly.outer[0].lon, poly.outer[0].lat, poly.outer[0].lon, poly.outer[0].lat};
  for (const Point& p : poly.outer) {
    b.min_lon = std::min(b.min_lon, p.lon);
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lon = std::max(b.max_lon, p.lon);
    b.max_lat = std::max(b.max_lat, p.lat);
  }
  return b;
}

}  // namespace

AssignmentResult assign_points(const std::vector<Point>& points,
                               const std::vector<Polygon>& polygons) {
  std::vector<Bbox> boxes;
  boxes.reserve(polygons.size());
  for (const auto& poly : polygons) {
    if (poly.outer.empty()) throw NumericError("geo: polygon with empty shell");
    boxes.push_back(polygon_bbox(poly));
  }

  AssignmentResult res;
  res.assignment.assign(points.size(), -1);
  res.counts.assign(polygons.size(), 0);
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    for (std::size_t gi = 0; gi < polygons.size(); ++gi) {
      if (!boxes[gi].contains(points[pi])) continue;
      if (point_in_polygon(points[pi], polygons[gi])) {
        res.assignment[pi] = static_cast<std::ptrdiff_t>(gi);
        ++res.counts[gi];
        break;
      }
    }
    if (res.assignment[pi] < 0) ++res.unassigned;
  }
  return res;
}

double WeightsMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (const auto& nb : rows[i]) s += nb.weight;
  return s;
}

WeightsMatrix queen_weights(const std::vector<Polygon>& polys) {
  const std::size_t n = polys.size();
  // Exact coordinate match: map each vertex to the units touching it. The
  // closing vertex repeats the first, so dedupe per unit.
  std::map<std::pair<double, double>, std::vector<std::size_t>> vertex_units;
  for (std::size_t i = 0; i < n; ++i) {
    auto add_ring = [&](const Ring& ring) {
      for (const Point& v : ring) {
        auto& units = vertex_units[{v.lon, v.lat}];
        if (units.empty() || units.back() != i) units.push_back(i);
      }
    };
    add_ring(polys[i].outer);
    for (const auto& hole : polys[i].holes) add_ring(hole);
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [vertex, units] : vertex_units) {
    (void)vertex;
    for (std::size_t a = 0; a < units.size(); ++a) {
      for (std::size_t b = a + 1; b < units.size(); ++b) {
        adj[units[a]].push_back(units[b]);
        adj[units[b]].push_back(units[a]);
      }
    }
  }

  WeightsMatrix w;
  w.scheme = "queen";
  w.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& nb = adj[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (nb.empty()) continue;  // isolated unit keeps an empty row
    const double weight = 1.0 / static_cast<double>(nb.size());
    w.rows[i].reserve(nb.size());
    for (const std::size_t j : nb) w.rows[i].push_back({j, weight});
  }
  return w;
}

WeightsMatrix knn_weights(const std::vector<Point>& centroids, int k) {
  const std::size_t n = centroids.size();
  if (k < 1) throw ValidationError("geo: knn weights require k >= 1");
  if (static_cast<std::size_t>(k) >= n) {
    throw ValidationError("geo: knn weights require k < number of units");
  }
  WeightsMatrix w;
  w.scheme = "knn";
  w.k = k;
  w.rows.resize(n);
  const double weight = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = k_nearest(centroids, centroids[i],
                                static_cast<std::size_t>(k), i);
    std::vector<std::size_t> sorted_nbrs(nbrs.begin(), nbrs.end());
    std::sort(sorted_nbrs.begin(), sorted_nbrs.end());
    w.rows[i].reserve(sorted_nbrs.size());
    for (const std::size_t j : sorted_nbrs) w.rows[i].push_back({j, weight});
  }
  return w;
}

}  // namespace areal
