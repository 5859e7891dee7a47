#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "areal/diagnostics.hpp"
#include "areal/error.hpp"
#include "areal/eval.hpp"
#include "areal/folds.hpp"
#include "areal/ingest.hpp"
#include "areal/io.hpp"
#include "areal/rng.hpp"
#include "areal/synth.hpp"
#include "areal/text.hpp"

#include "oracle.hpp"

using namespace areal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Small smooth regression problem for CV tests.
void smooth_data(std::uint64_t seed, arma::uword n, arma::uword p, arma::mat& X,
                 arma::vec& y) {
  Rng rng(seed);
  X.set_size(n, p);
  y.set_size(n);
  for (arma::uword i = 0; i < n; ++i) {
    for (arma::uword j = 0; j < p; ++j) X(i, j) = rng.uniform(0, 10);
    y(i) = 2.0 * X(i, 0) - X(i, 1 % p) + 0.2 * rng.normal();
  }
}

ModelSpec small_rf(std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::rf;
  spec.rf.n_tree = 15;
  spec.rf.seed = seed;
  return spec;
}

Dataset small_dataset(std::uint64_t seed) {
  SynthConfig cfg = scenario_paper_like(seed);
  cfg.grid_rows = 12;
  cfg.grid_cols = 12;
  const SynthDataset synth = generate(cfg);
  Dataset data;
  data.cbgs = synth.cbgs;
  data.schema = synth.schema;
  std::set<std::string> codes;
  for (const auto& [code, type] : default_naics_map()) codes.insert(code);
  data.outlets = filter_alcohol_pois(synth.pois, codes, default_naics_map());
  data.visits = synth.visits;
  data.dv_incidents =
      filter_dv_incidents(synth.incidents, default_dv_types(), default_home_locations())
          .kept;
  return data;
}

ExperimentOptions small_options(std::uint64_t seed) {
  ExperimentOptions opts;
  opts.seed = seed;
  opts.cv_k = 5;
  opts.n_perm = 99;
  opts.rf.n_tree = 20;
  opts.mlp.layers = {16, 8};
  opts.mlp.dropout = {0.0, 0.0};
  opts.mlp.epochs = 20;
  opts.mlp.batch = 16;
  return opts;
}

}  // namespace

TEST_CASE("kfold_split partitions the rows with balanced fold sizes") {
  const FoldSpec folds = kfold_split(23, 5, 7);
  REQUIRE(folds.assignment.size() == 23);
  std::vector<int> count(5, 0);
  for (const int f : folds.assignment) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++count[static_cast<std::size_t>(f)];
  }
  // 23 = 5*4 + 3: the first three folds get the extra row.
  CHECK(count == std::vector<int>{5, 5, 5, 4, 4});
  std::set<std::size_t> seen;
  for (int f = 0; f < 5; ++f) {
    for (const std::size_t r : folds.fold_rows(f)) {
      CHECK(folds.assignment[r] == f);
      seen.insert(r);
    }
  }
  CHECK(seen.size() == 23);

  const FoldSpec same = kfold_split(23, 5, 7);
  CHECK(same.assignment == folds.assignment);
  CHECK(same.hash() == folds.hash());
  const FoldSpec other = kfold_split(23, 5, 8);
  CHECK(other.assignment != folds.assignment);
  CHECK(other.hash() != folds.hash());

  CHECK_THROWS_AS(kfold_split(10, 1, 0), ValidationError);
  CHECK_THROWS_AS(kfold_split(4, 5, 0), ValidationError);
}

TEST_CASE("cross_validate fits the scaler on training rows only") {
  arma::mat X;
  arma::vec y;
  smooth_data(301, 60, 3, X, y);
  const FoldSpec folds = kfold_split(60, 4, 9);
  CvOptions opts;
  const CvResult cv = cross_validate(small_rf(17), X, y, folds, opts);

  REQUIRE(cv.folds.size() == 4);
  CHECK(cv.fold_hash == folds.hash());
  for (const FoldDetail& d : cv.folds) {
    // Recompute the training-row scaler independently.
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < 60; ++i) {
      if (folds.assignment[i] != d.fold) train.push_back(i);
    }
    CHECK(d.train_rows == train.size());
    CHECK(d.test_rows == 60 - train.size());
    for (arma::uword c = 0; c < 3; ++c) {
      double m = 0.0;
      for (const std::size_t r : train) m += X(r, c);
      m /= static_cast<double>(train.size());
      double ss = 0.0;
      for (const std::size_t r : train) ss += (X(r, c) - m) * (X(r, c) - m);
      const double s = std::sqrt(ss / static_cast<double>(train.size()));
      CHECK(d.scaler_mean(c) == doctest::Approx(m).epsilon(1e-12));
      CHECK(d.scaler_std(c) == doctest::Approx(s).epsilon(1e-12));
    }
    CHECK(d.importance_defined);
    CHECK(d.importance.n_elem == 3);
  }

  // Pooled RMSE equals the oracle recomputation from out-of-fold predictions.
  std::vector<double> obs(y.begin(), y.end());
  std::vector<double> pred(cv.oof_pred.begin(), cv.oof_pred.end());
  CHECK(cv.pooled_rmse == doctest::Approx(oracle::pooled_rmse(obs, pred)).epsilon(1e-12));
  double r2_sum = 0.0;
  for (const FoldDetail& d : cv.folds) r2_sum += d.r2;
  CHECK(cv.mean_r2 == doctest::Approx(r2_sum / 4.0).epsilon(1e-12));
}

TEST_CASE("cross_validate honors prestandardized input and stays deterministic") {
  arma::mat X;
  arma::vec y;
  smooth_data(302, 50, 2, X, y);
  const FoldSpec folds = kfold_split(50, 5, 3);
  CvOptions pre;
  pre.prestandardized = true;
  const CvResult a = cross_validate(small_rf(4), X, y, folds, pre);
  for (const FoldDetail& d : a.folds) {
    CHECK(arma::abs(d.scaler_mean).max() == 0.0);
    CHECK(d.scaler_std.min() == 1.0);
  }

  CvOptions par = pre;
  par.threads = 8;
  const CvResult b = cross_validate(small_rf(4), X, y, folds, par);
  CHECK(arma::abs(a.oof_pred - b.oof_pred).max() == 0.0);
  CHECK(a.pooled_rmse == b.pooled_rmse);

  // A different model seed changes predictions but not the partition.
  const CvResult c = cross_validate(small_rf(5), X, y, folds, pre);
  CHECK(c.fold_hash == a.fold_hash);
  CHECK(arma::abs(c.oof_pred - a.oof_pred).max() > 0.0);
}

TEST_CASE("cross_validate runs mlp models") {
  arma::mat X;
  arma::vec y;
  smooth_data(303, 60, 2, X, y);
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::mlp;
  spec.mlp.layers = {8};
  spec.mlp.dropout = {0.0};
  spec.mlp.epochs = 30;
  spec.mlp.batch = 12;
  spec.mlp.learning_rate = 5e-3;
  spec.mlp.seed = 6;
  const FoldSpec folds = kfold_split(60, 4, 2);
  CvOptions opts;
  const CvResult cv = cross_validate(spec, X, y, folds, opts);
  CHECK(cv.folds.size() == 4);
  CHECK(std::isfinite(cv.mean_r2));
  for (const FoldDetail& d : cv.folds) CHECK_FALSE(d.importance_defined);
  const CvResult again = cross_validate(spec, X, y, folds, opts);
  CHECK(arma::abs(cv.oof_pred - again.oof_pred).max() == 0.0);
}

TEST_CASE("cross_validate validates fold coverage and training size") {
  arma::mat X;
  arma::vec y;
  smooth_data(304, 10, 7, X, y);
  CvOptions opts;
  CHECK_THROWS_AS(cross_validate(small_rf(1), X, y, kfold_split(9, 3, 0), opts),
                  ValidationError);
  // k = 5 leaves 8 training rows, below the p + 2 = 9 floor.
  CHECK_THROWS_AS(cross_validate(small_rf(1), X, y, kfold_split(10, 5, 0), opts),
                  ValidationError);
}

TEST_CASE("residual_moran equals moran of standardized residuals") {
  Rng rng(305);
  const int side = 5;
  std::vector<Polygon> polys;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      Ring ring = {{c + 0.0, r + 0.0}, {c + 1.0, r + 0.0}, {c + 1.0, r + 1.0},
                   {c + 0.0, r + 1.0}, {c + 0.0, r + 0.0}};
      polys.push_back({ring, {}});
    }
  }
  const WeightsMatrix w = queen_weights(polys);
  arma::vec resid(25);
  for (auto& v : resid) v = rng.normal(0.0, 3.0);
  const MoranResult via_helper = residual_moran(resid, w, 99, 42);
  const MoranResult direct = morans_i(standardized_residuals(resid), w, 99, 42);
  CHECK(via_helper.observed == direct.observed);
  CHECK(via_helper.expected == direct.expected);
  CHECK(via_helper.p_perm == direct.p_perm);
  CHECK(via_helper.z == direct.z);
}

TEST_CASE("run_experiment shares folds, adds visit rates, and is reproducible") {
  const Dataset data = small_dataset(91);
  const ExperimentOptions opts = small_options(91);
  const ExperimentResult R = run_experiment(data, opts);

  // One partition for every cross-validated model.
  CHECK(R.rf_baseline.fold_hash == R.report.fold_hash);
  CHECK(R.rf_test.fold_hash == R.report.fold_hash);
  CHECK(R.mlp_baseline.fold_hash == R.report.fold_hash);
  CHECK(R.mlp_test.fold_hash == R.report.fold_hash);

  // Test condition = baseline variables plus the four visit rates, in order.
  const std::vector<std::string> base_vars = R.report.baseline.variables;
  const std::vector<std::string> test_vars = R.report.test.variables;
  REQUIRE(test_vars.size() == base_vars.size() + 4);
  CHECK(std::equal(base_vars.begin(), base_vars.end(), test_vars.begin()));
  const std::vector<std::string> vr = visit_rate_variable_names();
  CHECK(std::equal(vr.begin(), vr.end(), test_vars.end() - 4));
  // Baseline never contains a visit rate.
  for (const std::string& v : base_vars) {
    CHECK(std::find(vr.begin(), vr.end(), v) == vr.end());
  }

  // Bandwidths respect the search window.
  const int n = static_cast<int>(R.rates.rows.size());
  const int p_base = static_cast<int>(base_vars.size());
  CHECK(R.report.baseline.gwr_bandwidth >= p_base + 3);
  CHECK(R.report.baseline.gwr_bandwidth <= n - 1);
  CHECK(R.report.test.gwr_bandwidth >= static_cast<int>(test_vars.size()) + 3);

  CHECK(R.report.baseline.ols.provenance == "in_sample");
  CHECK(R.report.baseline.rf.provenance == "cv");
  CHECK(R.report.baseline.mlp.provenance == "cv");
  CHECK(R.report.baseline.ols_moran.n_perm == 99);

  // Bitwise reproducibility of the serialized comparison.
  const ExperimentResult again = run_experiment(data, opts);
  CHECK(comparison_to_json(again.report) == comparison_to_json(R.report));
}

TEST_CASE("comparison json carries deltas, fold hash, and ground truth") {
  const Dataset data = small_dataset(92);
  ExperimentOptions opts = small_options(92);
  opts.ground_truth_fingerprint = "fnv1a64:00000000deadbeef";
  const ExperimentResult R = run_experiment(data, opts);
  const json j = json::parse(comparison_to_json(R.report));

  CHECK(j.at("seed").get<std::uint64_t>() == 92);
  CHECK(j.at("folds").at("k").get<int>() == 5);
  CHECK(j.at("folds").at("hash").get<std::string>() == hex64(R.report.fold_hash));
  CHECK(j.at("ground_truth").at("fingerprint").get<std::string>() ==
        "fnv1a64:00000000deadbeef");

  const json& ols = j.at("models").at("ols");
  const double delta_r2 =
      ols.at("test").at("r2").get<double>() - ols.at("baseline").at("r2").get<double>();
  CHECK(ols.at("delta").at("r2").get<double>() == doctest::Approx(delta_r2).epsilon(1e-15));
  CHECK(ols.at("provenance").get<std::string>() == "in_sample");
  CHECK(ols.at("baseline").contains("aic"));
  const json& gwr = j.at("models").at("gwr");
  CHECK(gwr.at("baseline").contains("aicc"));
  const json& rf = j.at("models").at("rf");
  CHECK(rf.at("provenance").get<std::string>() == "cv");
  CHECK_FALSE(rf.at("baseline").contains("adj_r2"));
  CHECK(j.at("residual_moran").at("gwr").at("test").contains("p_perm"));

  // Without a fingerprint the ground-truth block is null.
  ExperimentOptions plain = small_options(92);
  const ExperimentResult R2 = run_experiment(data, plain);
  const json j2 = json::parse(comparison_to_json(R2.report));
  CHECK(j2.at("ground_truth").is_null());
}

TEST_CASE("experiment state round-trips byte for byte and export is stable") {
  const Dataset data = small_dataset(93);
  const ExperimentOptions opts = small_options(93);
  const ExperimentResult R = run_experiment(data, opts);
  const ExperimentState state = make_state(R, data.cbgs);

  const std::size_t n = R.rates.rows.size();
  REQUIRE(state.cbg_ids.size() == n);
  CHECK(std::is_sorted(state.cbg_ids.begin(), state.cbg_ids.end()));
  REQUIRE(state.gwr_coef.size() == n);
  CHECK(state.gwr_names.size() == state.gwr_coef[0].size());
  CHECK(state.gwr_names[0] == "intercept");
  REQUIRE(state.predictions.size() == 9);
  CHECK(state.predictions[0].first == "observed");

  const std::string text = state_to_json(state);
  const ExperimentState back = state_from_json(text, "test");
  CHECK(state_to_json(back) == text);
  CHECK_THROWS_AS(state_from_json("{}", "test"), ValidationError);
  CHECK_THROWS_AS(state_from_json("nope", "test"), ValidationError);

  const fs::path dir = fs::temp_directory_path() / "areal_export_test";
  fs::remove_all(dir);
  export_report(state, dir);
  const std::vector<std::string> expected = {
      "comparison.json",        "rates.csv",
      "rates.geojson",          "gwr_local.geojson",
      "residuals.geojson",      "predicted_vs_observed.csv"};
  for (const std::string& name : expected) {
    CHECK(fs::exists(dir / name));
  }
  std::size_t file_count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++file_count;
  }
  CHECK(file_count == expected.size());

  // Re-export reproduces identical bytes.
  std::map<std::string, std::string> first;
  for (const std::string& name : expected) first[name] = read_file(dir / name);
  export_report(state, dir);
  for (const std::string& name : expected) {
    CHECK(read_file(dir / name) == first[name]);
  }

  // Spot-check the exported artifacts.
  const json comp = json::parse(first["comparison.json"]);
  CHECK(comp.at("seed").get<std::uint64_t>() == 93);
  const json local = json::parse(first["gwr_local.geojson"]);
  CHECK(local.at("type").get<std::string>() == "FeatureCollection");
  CHECK(local.at("features").size() == n);
  const std::string& pvo = first["predicted_vs_observed.csv"];
  const std::size_t lines =
      static_cast<std::size_t>(std::count(pvo.begin(), pvo.end(), '\n'));
  CHECK(lines == n + 1);  // header plus one row per unit
  fs::remove_all(dir);
}
