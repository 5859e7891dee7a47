#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "areal/error.hpp"
#include "areal/ingest.hpp"
#include "areal/rates.hpp"

using namespace areal;

namespace {

// Grid of adjacent 0.01-degree cells near Chicago latitudes, id C<k>.
std::string grid_cbgs(int n, const std::string& attr_json_per_cell) {
  std::string features;
  for (int i = 0; i < n; ++i) {
    const double x0 = -87.9 + 0.01 * i;
    if (i) features += ",";
    features += R"({"type":"Feature","properties":{"cbg_id":"C)" +
                std::to_string(i) + R"(","population":)" +
                std::to_string(1000 * (i + 1)) + R"(,"device_count":)" +
                std::to_string(100) + "," + attr_json_per_cell +
                R"(},"geometry":{"type":"Polygon","coordinates":[[)" + "[" +
                std::to_string(x0) + ",41.6],[" + std::to_string(x0 + 0.01) +
                ",41.6],[" + std::to_string(x0 + 0.01) + ",41.61],[" +
                std::to_string(x0) + ",41.61],[" + std::to_string(x0) +
                ",41.6]]]}}";
  }
  return R"({"type":"FeatureCollection","features":[)" + features + "]}";
}

const std::vector<VariableDecl> kNone{};

IncidentTable incidents_at(const std::vector<Point>& pts) {
  IncidentTable t;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    IncidentRecord r;
    r.incident_id = "I" + std::to_string(i);
    r.location = pts[i];
    r.domestic = true;
    r.primary_type = "BATTERY";
    r.location_description = "Residence";
    t.rows.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("rate formulas are exact at the documented examples") {
  CHECK(dv_rate_value(5, 1000) == 5.0);
  CHECK(visit_rate_value(15, 30) == 0.5);
  CHECK(dv_rate_value(0, 123) == 0.0);
  CHECK_THROWS_AS(dv_rate_value(1, 0), NumericError);
  CHECK_THROWS_AS(visit_rate_value(1, 0), NumericError);
}

TEST_CASE("area prefers the supplied value and approximates otherwise") {
  CbgRecord rec;
  rec.area_km2 = 2.5;
  rec.area_supplied = true;
  CHECK(cbg_area_km2(rec) == 2.5);

  // A 0.01 x 0.01 degree cell at latitude ~41.6: dy ~ 1.112 km,
  // dx ~ dy * cos(41.605 deg).
  CbgRecord cell;
  cell.polygon.outer = {{-87.9, 41.6}, {-87.89, 41.6}, {-87.89, 41.61},
                        {-87.9, 41.61}, {-87.9, 41.6}};
  const double dy = kEarthRadiusM * M_PI / 180.0 / 1000.0 * 0.01;
  const double expect = dy * dy * std::cos(41.604 * M_PI / 180.0);
  CHECK(cbg_area_km2(cell) == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("reverse_visits sums by unit and outlet type") {
  const Loaded<CbgTable> cbgs = parse_cbgs(grid_cbgs(2, R"("z":0)"),
                                           "t", {{"z", VarCategory::age}});
  PoiTable pois;
  pois.rows = {{"P1", "445310", {-87.895, 41.605}, "liquor"},
               {"P2", "722410", {-87.885, 41.605}, "tavern"},
               {"P3", "999999", {-87.885, 41.605}, "other"}};
  std::vector<OutletPoi> outlets = {{pois.rows[0], OutletType::liquor_store},
                                    {pois.rows[1], OutletType::drinking_place}};
  VisitTable visits;
  visits.rows = {{"P1", "C0", 5}, {"P1", "C1", 7}, {"P2", "C0", 3},
                 {"P3", "C0", 100}, {"P1", "C9", 11}};
  const VisitSums sums = reverse_visits(visits, outlets, cbgs.table);
  CHECK(sums.skipped_non_outlet == 1);
  CHECK(sums.skipped_unknown_cbg == 1);
  CHECK(sums.by_cbg.at("C0")[0] == 5);
  CHECK(sums.by_cbg.at("C0")[1] == 3);
  CHECK(sums.by_cbg.at("C1")[0] == 7);
}

TEST_CASE("derive_rates assigns incidents, applies minima, and orders rows") {
  // Three cells; C0 gets 2 incidents, C1 gets 1, C2 gets 0; one incident
  // falls outside every cell.
  const CbgTable cbgs =
      parse_cbgs(grid_cbgs(3, R"("z":0)"), "t", {{"z", VarCategory::age}}).table;
  PoiTable pois;
  pois.rows = {{"P1", "445310", {-87.895, 41.605}, "liquor"}};
  const std::vector<OutletPoi> outlets = {{pois.rows[0], OutletType::liquor_store}};
  VisitTable visits;
  visits.rows = {{"P1", "C0", 50}, {"P1", "C1", 20}};
  const IncidentTable incidents = incidents_at({{-87.895, 41.605},
                                                {-87.896, 41.604},
                                                {-87.885, 41.603},
                                                {0.0, 0.0}});
  RateOptions opts;
  const RateTable rt = derive_rates(cbgs, outlets, visits, incidents, opts);
  REQUIRE(rt.rows.size() == 3);
  CHECK(rt.rows[0].cbg_id == "C0");
  CHECK(rt.rows[0].dv_rate == dv_rate_value(2, 1000));
  CHECK(rt.rows[1].dv_rate == dv_rate_value(1, 2000));
  CHECK(rt.rows[2].dv_rate == 0.0);
  CHECK(rt.rows[0].visit_rate[0] == doctest::Approx(0.5));  // 50 / 100
  CHECK(rt.rows[1].visit_rate[0] == doctest::Approx(0.2));
  CHECK(rt.rows[0].visit_rate[1] == 0.0);
  CHECK(rt.assigned_incidents == 3);
  CHECK(rt.unassigned_incidents == 1);
  CHECK(rt.rows[0].population_density ==
        doctest::Approx(1000.0 / cbg_area_km2(cbgs.rows[0])).epsilon(1e-12));
}

TEST_CASE("derive_rates excludes units below minima and flags lost incidents") {
  const CbgTable cbgs =
      parse_cbgs(grid_cbgs(3, R"("z":0)"), "t", {{"z", VarCategory::age}}).table;
  const std::vector<OutletPoi> outlets;
  const VisitTable visits;
  const IncidentTable incidents = incidents_at({{-87.895, 41.605}});
  RateOptions opts;
  opts.min_pop = 1500;  // drops C0 (pop 1000), which holds the one incident
  const RateTable rt = derive_rates(cbgs, outlets, visits, incidents, opts);
  CHECK(rt.rows.size() == 2);
  REQUIRE(rt.excluded.size() == 1);
  CHECK(rt.excluded[0].cbg_id == "C0");
  CHECK(rt.excluded[0].nonzero_incidents_dropped);
  CHECK(rt.rows.size() + rt.excluded.size() == cbgs.rows.size());

  RateOptions dev;
  dev.min_devices = 101;  // everyone has 100 devices
  const RateTable none = derive_rates(cbgs, outlets, visits, incidents, dev);
  CHECK(none.rows.empty());
  CHECK(none.excluded.size() == 3);
}

TEST_CASE("rate csv round-trips exactly") {
  const CbgTable cbgs =
      parse_cbgs(grid_cbgs(3, R"("z":0)"), "t", {{"z", VarCategory::age}}).table;
  PoiTable pois;
  pois.rows = {{"P1", "445310", {-87.895, 41.605}, "liquor"}};
  const std::vector<OutletPoi> outlets = {{pois.rows[0], OutletType::liquor_store}};
  VisitTable visits;
  visits.rows = {{"P1", "C0", 17}, {"P1", "C2", 3}};
  const IncidentTable incidents =
      incidents_at({{-87.895, 41.605}, {-87.885, 41.603}});
  const RateTable rt = derive_rates(cbgs, outlets, visits, incidents, RateOptions{});
  const std::string csv = rate_table_to_csv(rt);
  const RateTable back = rate_table_from_csv(csv, "t");
  REQUIRE(back.rows.size() == rt.rows.size());
  for (std::size_t i = 0; i < rt.rows.size(); ++i) {
    CHECK(back.rows[i].cbg_id == rt.rows[i].cbg_id);
    CHECK(back.rows[i].dv_rate == rt.rows[i].dv_rate);  // bitwise
    for (int t = 0; t < 4; ++t) {
      CHECK(back.rows[i].visit_rate[(std::size_t)t] ==
            rt.rows[i].visit_rate[(std::size_t)t]);
    }
    CHECK(back.rows[i].population_density == rt.rows[i].population_density);
  }
  CHECK(rate_table_to_csv(back) == csv);
}

TEST_CASE("derived variable names and categories resolve") {
  const auto names = visit_rate_variable_names();
  REQUIRE(names.size() == 4);
  CHECK(names[0] == "liquor_store_vr");
  CHECK(names[3] == "winery_vr");
  VariableSchema schema;
  schema.variables = {{"inc", VarCategory::disadvantage}};
  CHECK(category_of("inc", schema) == VarCategory::disadvantage);
  CHECK(category_of("population_density", schema) == VarCategory::urbanicity);
  CHECK(category_of("brewery_vr", schema) == VarCategory::visits);
  CHECK_THROWS_AS(category_of("nope", schema), ValidationError);
}

TEST_CASE("assemble_features standardizes and recovers raw columns") {
  const std::string cells = grid_cbgs(4, R"("inc":0)");
  // Patch distinct per-cell attribute values in by re-parsing with indexed
  // values: cell i gets inc = 3*i + 1.
  std::string text = cells;
  for (int i = 0; i < 4; ++i) {
    const std::string needle = R"("cbg_id":"C)" + std::to_string(i) + R"(","population")";
    const std::size_t pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    const std::size_t inc_pos = text.find(R"("inc":0)", pos);
    REQUIRE(inc_pos != std::string::npos);
    text.replace(inc_pos, 7, R"("inc":)" + std::to_string(3 * i + 1));
  }
  const CbgTable cbgs =
      parse_cbgs(text, "t", {{"inc", VarCategory::disadvantage}}).table;
  PoiTable pois;
  pois.rows = {{"P1", "445310", {-87.895, 41.605}, "liquor"},
               {"P2", "722410", {-87.885, 41.605}, "bar"},
               {"P3", "312120", {-87.875, 41.605}, "brewery"},
               {"P4", "312130", {-87.865, 41.605}, "winery"}};
  // One outlet per type so every visit-rate column varies across units.
  const std::vector<OutletPoi> outlets = {
      {pois.rows[0], OutletType::liquor_store},
      {pois.rows[1], OutletType::drinking_place},
      {pois.rows[2], OutletType::brewery},
      {pois.rows[3], OutletType::winery}};
  VisitTable visits;
  visits.rows = {{"P1", "C0", 10}, {"P1", "C1", 20}, {"P1", "C2", 30},
                 {"P1", "C3", 5},  {"P2", "C0", 4},  {"P2", "C1", 9},
                 {"P2", "C2", 1},  {"P3", "C1", 2},  {"P3", "C2", 6},
                 {"P3", "C3", 8},  {"P4", "C0", 7},  {"P4", "C2", 5},
                 {"P4", "C3", 2}};
  const IncidentTable incidents = incidents_at({{-87.895, 41.605}});
  const RateTable rt = derive_rates(cbgs, outlets, visits, incidents, RateOptions{});

  VariableSchema schema;
  schema.variables = {{"inc", VarCategory::disadvantage}};
  const FeatureMatrix fm = assemble_features(cbgs, rt, {"inc"}, schema, true);
  REQUIRE(fm.columns.size() == 5);  // inc + four visit rates
  CHECK(fm.columns[0].name == "inc");
  CHECK(fm.columns[1].name == "liquor_store_vr");
  CHECK(fm.columns[1].category == VarCategory::visits);

  // Standardized: mean 0, population sd 1.
  for (arma::uword c = 0; c < 2; ++c) {
    CHECK(arma::mean(fm.values.col(c)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(arma::stddev(fm.values.col(c), 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // raw() undoes the scaler exactly enough for equality checks.
  const arma::mat raw = fm.raw();
  CHECK(raw(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(raw(3, 0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(raw(2, fm.col_index("liquor_store_vr")) ==
        doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fm.target(0) == rt.rows[0].dv_rate);

  // Constant columns cannot be standardized; the error names the column.
  const CbgTable flat =
      parse_cbgs(cells, "t", {{"inc", VarCategory::disadvantage}}).table;
  const RateTable flat_rt =
      derive_rates(flat, outlets, visits, incidents, RateOptions{});
  CHECK_THROWS_WITH_AS(assemble_features(flat, flat_rt, {"inc"}, schema, false),
                       doctest::Contains("inc"), ValidationError);
}
