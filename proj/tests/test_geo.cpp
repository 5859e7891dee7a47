#include <cmath>
#include <vector>

#include <doctest.h>

#include "areal/error.hpp"
#include "areal/geo.hpp"
#include "areal/rng.hpp"

#include "oracle.hpp"

using namespace areal;

namespace {

Polygon square(double x0, double y0, double side = 1.0) {
  Polygon p;
  p.outer = {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side},
             {x0, y0}};
  return p;
}

Polygon with_hole() {
  Polygon p = square(0, 0, 4);
  p.holes.push_back({{1, 1}, {1, 3}, {3, 3}, {3, 1}, {1, 1}});  // CW hole
  return p;
}

}  // namespace

TEST_CASE("ring_signed_area sign follows orientation") {
  CHECK(ring_signed_area(square(0, 0).outer) == doctest::Approx(1.0));
  Ring cw = {{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}};
  CHECK(ring_signed_area(cw) == doctest::Approx(-1.0));
}

TEST_CASE("point containment handles interior, exterior, and holes") {
  const Polygon p = with_hole();
  CHECK(point_in_polygon({0.5, 0.5}, p));
  CHECK_FALSE(point_in_polygon({2.0, 2.0}, p));   // inside the hole
  CHECK_FALSE(point_in_polygon({5.0, 0.5}, p));
  CHECK(point_in_polygon({0.5, 3.9}, p));
}

TEST_CASE("containment agrees with the winding-number oracle on random points") {
  // A non-convex polygon (L-shape) plus the holed square.
  Polygon ell;
  ell.outer = {{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 3}, {0, 3}, {0, 0}};
  const Polygon holed = with_hole();
  Rng rng(99);
  int inside_seen = 0;
  for (int i = 0; i < 4000; ++i) {
    const Point pt{rng.uniform(-0.7, 4.7), rng.uniform(-0.7, 4.7)};
    CHECK(point_in_polygon(pt, ell) == oracle::point_in_polygon(pt, ell));
    const bool got = point_in_polygon(pt, holed);
    CHECK(got == oracle::point_in_polygon(pt, holed));
    inside_seen += got ? 1 : 0;
  }
  CHECK(inside_seen > 0);
}

TEST_CASE("centroid of a square is its center; holes shift the moment") {
  const Point c = polygon_centroid(square(2, 3));
  CHECK(c.lon == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(c.lat == doctest::Approx(3.5).epsilon(1e-12));

  // Square [0,4]^2 with square hole [1,3]^2: symmetric, centroid stays (2,2).
  const Point h = polygon_centroid(with_hole());
  CHECK(h.lon == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(h.lat == doctest::Approx(2.0).epsilon(1e-12));

  // Off-center hole pushes the centroid away from the hole.
  Polygon p = square(0, 0, 4);
  p.holes.push_back({{0.5, 0.5}, {0.5, 1.5}, {1.5, 1.5}, {1.5, 0.5}, {0.5, 0.5}});
  const Point q = polygon_centroid(p);
  CHECK(q.lon > 2.0);
  CHECK(q.lat > 2.0);

  Polygon degenerate;
  degenerate.outer = {{0, 0}, {1, 1}, {2, 2}, {0, 0}};
  CHECK_THROWS_AS(polygon_centroid(degenerate), NumericError);
}

TEST_CASE("haversine matches textbook values") {
  // One degree of latitude on the reference sphere.
  const double one_deg_lat = M_PI / 180.0 * kEarthRadiusM;
  CHECK(haversine_m({0, 0}, {0, 1}) == doctest::Approx(one_deg_lat).epsilon(1e-9));
  // One degree of longitude at 60N is half as long as at the equator.
  const double at_eq = haversine_m({10, 0}, {11, 0});
  const double at_60 = haversine_m({10, 60}, {11, 60});
  CHECK(at_60 / at_eq == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(haversine_m({5, 5}, {5, 5}) == 0.0);
  CHECK(haversine_m({1, 2}, {3, 4}) == haversine_m({3, 4}, {1, 2}));
}

TEST_CASE("k_nearest matches the exhaustive oracle") {
  Rng rng(123);
  std::vector<Point> pts;
  for (int i = 0; i < 60; ++i) {
    pts.push_back({rng.uniform(-88, -87), rng.uniform(41, 42)});
  }
  for (std::size_t self = 0; self < 6; ++self) {
    for (const std::size_t k : {1u, 5u, 20u}) {
      const auto got = k_nearest(pts, pts[self], k, self);
      const auto want = oracle::k_nearest(pts, pts[self], k, self);
      CHECK(got == want);
    }
  }
}

TEST_CASE("k_nearest breaks distance ties toward the smaller index") {
  // Four points equidistant from the origin query.
  const std::vector<Point> pts = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  const auto got = k_nearest(pts, pts[0], 2, 0);
  REQUIRE(got.size() == 2);
  CHECK(got[0] == 1);
  CHECK(got[1] == 2);
}

TEST_CASE("assign_points places shared-edge points in exactly one polygon") {
  // Half-open crossing test: a point on a shared vertical edge is inside the
  // polygon whose west edge it lies on, never both.
  const std::vector<Polygon> polys = {square(0, 0), square(1, 0)};
  const std::vector<Point> pts = {
      {0.5, 0.5},   // interior of first
      {1.5, 0.5},   // interior of second
      {1.0, 0.5},   // on the shared edge
      {9.0, 9.0},   // outside everything
  };
  const AssignmentResult r = assign_points(pts, polys);
  CHECK(r.assignment[0] == 0);
  CHECK(r.assignment[1] == 1);
  CHECK(r.assignment[2] == 1);  // east cell owns the shared edge
  CHECK(r.assignment[3] == -1);
  CHECK(r.unassigned == 1);
  CHECK(r.counts[0] == 1);
  CHECK(r.counts[1] == 2);
}

TEST_CASE("assign_points resolves overlapping polygons by listing order") {
  // Second polygon overlaps the first; points in the overlap go to the first.
  const std::vector<Polygon> polys = {square(0, 0), square(0.5, 0)};
  const std::vector<Point> pts = {
      {0.75, 0.5},  // inside both
      {1.25, 0.5},  // inside second only
  };
  const AssignmentResult r = assign_points(pts, polys);
  CHECK(r.assignment[0] == 0);
  CHECK(r.assignment[1] == 1);
  CHECK(r.unassigned == 0);
}

TEST_CASE("queen weights connect rook and corner neighbors, row-standardized") {
  // 2x2 block of unit squares; diagonal pairs share exactly one vertex.
  const std::vector<Polygon> polys = {square(0, 0), square(1, 0), square(0, 1),
                                      square(1, 1)};
  const WeightsMatrix w = queen_weights(polys);
  CHECK(w.scheme == "queen");
  REQUIRE(w.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(w.rows[i].size() == 3);  // everyone touches everyone in a 2x2 block
    CHECK(w.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
    for (const WeightedNeighbor& nb : w.rows[i]) {
      CHECK(nb.weight == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      CHECK(nb.index != i);
    }
  }
}

TEST_CASE("queen weights leave detached units isolated") {
  const std::vector<Polygon> polys = {square(0, 0), square(1, 0), square(9, 9)};
  const WeightsMatrix w = queen_weights(polys);
  CHECK(w.rows[0].size() == 1);
  CHECK(w.rows[1].size() == 1);
  CHECK(w.rows[2].empty());
  CHECK(w.row_sum(2) == 0.0);
}

TEST_CASE("queen weights on a 3x3 grid match the chessboard neighbor counts") {
  std::vector<Polygon> polys;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) polys.push_back(square(c, r));
  }
  const WeightsMatrix w = queen_weights(polys);
  // Corners 3, edges 5, center 8.
  CHECK(w.rows[0].size() == 3);
  CHECK(w.rows[1].size() == 5);
  CHECK(w.rows[4].size() == 8);
}

TEST_CASE("knn weights give each of k neighbors weight 1/k") {
  Rng rng(7);
  std::vector<Point> pts;
  for (int i = 0; i < 30; ++i) {
    pts.push_back({rng.uniform(-88, -87), rng.uniform(41, 42)});
  }
  const WeightsMatrix w = knn_weights(pts, 4);
  CHECK(w.scheme == "knn");
  CHECK(w.k == 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(w.rows[i].size() == 4);
    CHECK(w.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
    // Same sets as the oracle (weights flatten ordering differences).
    const auto want = oracle::k_nearest(pts, pts[i], 4, i);
    std::vector<std::size_t> got;
    for (const auto& nb : w.rows[i]) got.push_back(nb.index);
    std::vector<std::size_t> sorted_want = want;
    std::sort(sorted_want.begin(), sorted_want.end());
    CHECK(got == sorted_want);  // rows are sorted by neighbor index
  }
}
