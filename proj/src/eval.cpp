#include "areal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "areal/csv.hpp"
#include "areal/error.hpp"
#include "areal/geojson.hpp"
#include "areal/io.hpp"
#include "areal/parallel.hpp"
#include "areal/stats.hpp"
#include "areal/text.hpp"

namespace areal {
namespace {

using nlohmann::json;

std::vector<std::size_t> train_rows_of(const FoldSpec& folds, int fold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds.assignment.size(); ++i) {
    if (folds.assignment[i] != fold) out.push_back(i);
  }
  return out;
}

}  // namespace

CvResult cross_validate(const ModelSpec& spec, const arma::mat& X,
                        const arma::vec& y, const FoldSpec& folds,
                        const CvOptions& opts) {
  const std::size_t n = X.n_rows;
  const std::size_t p = X.n_cols;
  if (folds.n != n || y.n_elem != n) {
    throw ValidationError("cross_validate: fold spec covers " + fmt_int(folds.n) +
                          " rows but the data has " + fmt_int(n));
  }
  const std::uint64_t base_seed =
      spec.kind == ModelSpec::Kind::rf ? spec.rf.seed : spec.mlp.seed;

  CvResult result;
  result.folds.resize(static_cast<std::size_t>(folds.k));
  result.oof_pred.set_size(n);
  result.fold_hash = folds.hash();

  parallel_for(static_cast<std::size_t>(folds.k), opts.threads, [&](std::size_t f) {
    const int fold = static_cast<int>(f);
    const std::vector<std::size_t> test = folds.fold_rows(fold);
    const std::vector<std::size_t> train = train_rows_of(folds, fold);
    if (train.size() < p + 2) {
      throw ValidationError("fold " + fmt_int(fold) + " has " + fmt_int(train.size()) +
                            " training rows; need at least " + fmt_int(p + 2));
    }

    FoldDetail detail;
    detail.fold = fold;
    detail.train_rows = train.size();
    detail.test_rows = test.size();
    detail.scaler_mean.zeros(p);
    detail.scaler_std.ones(p);
    if (!opts.prestandardized) {
      for (std::size_t c = 0; c < p; ++c) {
        double m = 0.0;
        for (const std::size_t r : train) m += X(r, c);
        m /= static_cast<double>(train.size());
        double ss = 0.0;
        for (const std::size_t r : train) {
          const double d = X(r, c) - m;
          ss += d * d;
        }
        const double s = std::sqrt(ss / static_cast<double>(train.size()));
        detail.scaler_mean(c) = m;
        detail.scaler_std(c) = s > 0.0 ? s : 1.0;
      }
    }

    auto scaled = [&](const std::vector<std::size_t>& rows) {
      arma::mat Z(rows.size(), p);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < p; ++c) {
          Z(i, c) = (X(rows[i], c) - detail.scaler_mean(c)) / detail.scaler_std(c);
        }
      }
      return Z;
    };
    const arma::mat Xtr = scaled(train);
    const arma::mat Xte = scaled(test);
    arma::vec ytr(train.size());
    arma::vec yte(test.size());
    for (std::size_t i = 0; i < train.size(); ++i) ytr(i) = y(train[i]);
    for (std::size_t i = 0; i < test.size(); ++i) yte(i) = y(test[i]);

    arma::vec pred;
    if (spec.kind == ModelSpec::Kind::rf) {
      RfConfig cfg = spec.rf;
      cfg.seed = derive_seed(base_seed, static_cast<std::uint64_t>(fold));
      const RfModel model = rf_train(Xtr, ytr, cfg, 1);
      pred = rf_predict(model, Xte);
      detail.importance = model.importance;
      detail.importance_defined = model.importance_defined;
    } else {
      MlpConfig cfg = spec.mlp;
      cfg.seed = derive_seed(base_seed, static_cast<std::uint64_t>(fold));
      const MlpModel model = mlp_train(Xtr, ytr, cfg);
      pred = mlp_predict(model, Xte);
    }

    const double test_mean = arma::mean(yte);
    double sse = 0.0;
    double tss = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const double e = yte(i) - pred(i);
      sse += e * e;
      const double d = yte(i) - test_mean;
      tss += d * d;
      result.oof_pred(test[i]) = pred(i);
    }
    detail.r2 = tss > 0.0 ? 1.0 - sse / tss : 0.0;
    detail.rmse = std::sqrt(sse / static_cast<double>(test.size()));
    result.folds[f] = std::move(detail);
  });

  double r2_sum = 0.0;
  for (const FoldDetail& d : result.folds) r2_sum += d.r2;
  result.mean_r2 = r2_sum / static_cast<double>(folds.k);
  double pooled_sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y(i) - result.oof_pred(i);
    pooled_sse += e * e;
  }
  result.pooled_rmse = std::sqrt(pooled_sse / static_cast<double>(n));
  return result;
}

MoranResult residual_moran(const arma::vec& residuals, const WeightsMatrix& w,
                           int n_perm, std::uint64_t seed, int threads) {
  return morans_i(standardized_residuals(residuals), w, n_perm, seed, threads);
}

ExperimentResult run_experiment(const Dataset& data, const ExperimentOptions& opts) {
  ExperimentResult R;
  R.rates = derive_rates(data.cbgs, data.outlets, data.visits, data.dv_incidents,
                         opts.rates);
  const std::size_t n = R.rates.rows.size();
  if (n < static_cast<std::size_t>(std::max(opts.cv_k, 10))) {
    throw ValidationError("only " + fmt_int(n) + " eligible units; too few to model");
  }

  std::vector<std::string> candidates;
  for (const VariableDecl& decl : data.schema.variables) candidates.push_back(decl.name);
  candidates.push_back(kPopulationDensityVar);
  const FeatureMatrix full =
      assemble_features(data.cbgs, R.rates, candidates, data.schema, false);
  VifPruneOptions vopts;
  vopts.threshold = opts.vif_threshold;
  vopts.composition_groups = data.schema.composition_groups;
  vopts.manual_drops = opts.manual_drops;
  vopts.threads = opts.threads;
  R.vif = vif_prune(full.values, full.column_names(), vopts);

  R.baseline_features =
      assemble_features(data.cbgs, R.rates, R.vif.retained, data.schema, false);
  R.test_features =
      assemble_features(data.cbgs, R.rates, R.vif.retained, data.schema, true);
  const arma::vec& y = R.baseline_features.target;

  const FoldSpec folds = kfold_split(n, opts.cv_k, opts.seed);

  std::vector<Point> locations;
  std::vector<Polygon> polygons;
  std::vector<std::string> row_ids;
  locations.reserve(n);
  polygons.reserve(n);
  for (const RateRow& row : R.rates.rows) {
    const CbgRecord& rec = data.cbgs.rows[data.cbgs.index_of(row.cbg_id)];
    polygons.push_back(rec.polygon);
    locations.push_back(polygon_centroid(rec.polygon));
    row_ids.push_back(row.cbg_id);
  }

  R.ols_baseline = ols_fit(R.baseline_features.values, y,
                           R.baseline_features.column_names());
  R.ols_test = ols_fit(R.test_features.values, y, R.test_features.column_names());

  GwrOptions gopts;
  gopts.threads = opts.threads;
  auto fit_gwr = [&](const FeatureMatrix& fm, int& chosen_k) {
    const int p = static_cast<int>(fm.values.n_cols);
    const int k_min = opts.gwr_k_min > 0 ? opts.gwr_k_min : p + 3;
    const int k_max = opts.gwr_k_max > 0 ? opts.gwr_k_max : static_cast<int>(n) - 1;
    const BandwidthSearch search = golden_search_bandwidth(
        fm.values, y, fm.column_names(), locations, k_min, k_max, gopts);
    chosen_k = search.best_k;
    return gwr_fit(fm.values, y, fm.column_names(), locations, search.best_k, gopts,
                   row_ids);
  };
  int k_baseline = 0;
  int k_test = 0;
  R.gwr_baseline = fit_gwr(R.baseline_features, k_baseline);
  R.gwr_test = fit_gwr(R.test_features, k_test);

  CvOptions cvo;
  cvo.prestandardized = opts.prestandardized;
  cvo.threads = opts.threads;
  auto cv_input = [&](const FeatureMatrix& fm) {
    return opts.prestandardized ? fm.values : fm.raw();
  };
  ModelSpec rf_spec;
  rf_spec.kind = ModelSpec::Kind::rf;
  rf_spec.rf = opts.rf;
  ModelSpec mlp_spec;
  mlp_spec.kind = ModelSpec::Kind::mlp;
  mlp_spec.mlp = opts.mlp;

  rf_spec.rf.seed = derive_seed(opts.seed, 11);
  R.rf_baseline = cross_validate(rf_spec, cv_input(R.baseline_features), y, folds, cvo);
  rf_spec.rf.seed = derive_seed(opts.seed, 12);
  R.rf_test = cross_validate(rf_spec, cv_input(R.test_features), y, folds, cvo);
  mlp_spec.mlp.seed = derive_seed(opts.seed, 13);
  R.mlp_baseline = cross_validate(mlp_spec, cv_input(R.baseline_features), y, folds, cvo);
  mlp_spec.mlp.seed = derive_seed(opts.seed, 14);
  R.mlp_test = cross_validate(mlp_spec, cv_input(R.test_features), y, folds, cvo);

  if (R.rf_baseline.fold_hash != R.rf_test.fold_hash ||
      R.mlp_baseline.fold_hash != R.rf_test.fold_hash ||
      R.mlp_test.fold_hash != R.rf_test.fold_hash) {
    throw ValidationError("internal: conditions consumed different fold partitions");
  }

  const WeightsMatrix w = queen_weights(polygons);
  const int n_perm = opts.n_perm;

  ComparisonReport& rep = R.report;
  rep.seed = opts.seed;
  rep.folds_k = opts.cv_k;
  rep.fold_hash = folds.hash();
  rep.ground_truth_fingerprint = opts.ground_truth_fingerprint;

  auto fill = [&](ConditionResult& cond, const FeatureMatrix& fm, const OlsFit& ols,
                  const GwrFit& gwr, const CvResult& rf, const CvResult& mlp, int k,
                  std::uint64_t moran_stream) {
    cond.variables = fm.column_names();
    cond.gwr_bandwidth = k;
    cond.ols = {ols.r2, ols.rmse, ols.adj_r2, ols.aic, "in_sample"};
    cond.gwr = {gwr.r2, std::sqrt(gwr.rss / static_cast<double>(gwr.n)), gwr.adj_r2,
                gwr.aicc, "in_sample"};
    cond.rf = {rf.mean_r2, rf.pooled_rmse, 0.0, 0.0, "cv"};
    cond.mlp = {mlp.mean_r2, mlp.pooled_rmse, 0.0, 0.0, "cv"};
    cond.ols_moran = residual_moran(ols.residuals, w, n_perm,
                                    derive_seed(opts.seed, moran_stream), opts.threads);
    cond.gwr_moran = residual_moran(gwr.residuals, w, n_perm,
                                    derive_seed(opts.seed, moran_stream + 1),
                                    opts.threads);
  };
  fill(rep.baseline, R.baseline_features, R.ols_baseline, R.gwr_baseline,
       R.rf_baseline, R.mlp_baseline, k_baseline, 21);
  fill(rep.test, R.test_features, R.ols_test, R.gwr_test, R.rf_test, R.mlp_test,
       k_test, 23);
  return R;
}

namespace {

json moran_json(const MoranResult& m) {
  return json{{"observed", m.observed}, {"expected", m.expected},
              {"z", m.z},               {"p_normal", m.p_normal},
              {"p_perm", m.p_perm},     {"n_perm", m.n_perm},
              {"n_used", m.n_used},     {"scheme", m.scheme},
              {"seed", m.seed}};
}

MoranResult moran_from_json(const json& j) {
  MoranResult m;
  m.observed = j.at("observed").get<double>();
  m.expected = j.at("expected").get<double>();
  m.z = j.at("z").get<double>();
  m.p_normal = j.at("p_normal").get<double>();
  m.p_perm = j.at("p_perm").get<double>();
  m.n_perm = j.at("n_perm").get<int>();
  m.n_used = j.at("n_used").get<std::size_t>();
  m.scheme = j.at("scheme").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

json metric_json(const MetricBlock& b, const char* aic_key) {
  json j{{"r2", b.r2}, {"rmse", b.rmse}};
  if (b.provenance == "in_sample") {
    j["adj_r2"] = b.adj_r2;
    j[aic_key] = b.aic;
  }
  return j;
}

json model_json(const MetricBlock& baseline, const MetricBlock& test,
                const char* aic_key) {
  json delta{{"r2", test.r2 - baseline.r2}, {"rmse", test.rmse - baseline.rmse}};
  if (baseline.provenance == "in_sample") {
    delta["adj_r2"] = test.adj_r2 - baseline.adj_r2;
    delta[aic_key] = test.aic - baseline.aic;
  }
  return json{{"baseline", metric_json(baseline, aic_key)},
              {"test", metric_json(test, aic_key)},
              {"delta", delta},
              {"provenance", baseline.provenance}};
}

MetricBlock metric_from_json(const json& j, const char* aic_key,
                             const std::string& provenance) {
  MetricBlock b;
  b.r2 = j.at("r2").get<double>();
  b.rmse = j.at("rmse").get<double>();
  b.provenance = provenance;
  if (provenance == "in_sample") {
    b.adj_r2 = j.at("adj_r2").get<double>();
    b.aic = j.at(aic_key).get<double>();
  }
  return b;
}

json comparison_json(const ComparisonReport& rep) {
  json j;
  j["seed"] = rep.seed;
  j["folds"] = json{{"k", rep.folds_k}, {"hash", hex64(rep.fold_hash)}};
  j["bandwidth"] = json{{"baseline", rep.baseline.gwr_bandwidth},
                        {"test", rep.test.gwr_bandwidth}};
  j["variables"] = json{{"baseline", rep.baseline.variables},
                        {"test", rep.test.variables}};
  j["models"] = json{
      {"ols", model_json(rep.baseline.ols, rep.test.ols, "aic")},
      {"gwr", model_json(rep.baseline.gwr, rep.test.gwr, "aicc")},
      {"rf", model_json(rep.baseline.rf, rep.test.rf, "aic")},
      {"mlp", model_json(rep.baseline.mlp, rep.test.mlp, "aic")}};
  j["residual_moran"] =
      json{{"ols", json{{"baseline", moran_json(rep.baseline.ols_moran)},
                        {"test", moran_json(rep.test.ols_moran)}}},
           {"gwr", json{{"baseline", moran_json(rep.baseline.gwr_moran)},
                        {"test", moran_json(rep.test.gwr_moran)}}}};
  if (rep.ground_truth_fingerprint.empty()) {
    j["ground_truth"] = nullptr;
  } else {
    j["ground_truth"] = json{{"fingerprint", rep.ground_truth_fingerprint}};
  }
  return j;
}

ComparisonReport comparison_from_json(const json& j) {
  ComparisonReport rep;
  rep.seed = j.at("seed").get<std::uint64_t>();
  rep.folds_k = j.at("folds").at("k").get<int>();
  rep.fold_hash = parse_hex64(j.at("folds").at("hash").get<std::string>());
  rep.baseline.gwr_bandwidth = j.at("bandwidth").at("baseline").get<int>();
  rep.test.gwr_bandwidth = j.at("bandwidth").at("test").get<int>();
  rep.baseline.variables =
      j.at("variables").at("baseline").get<std::vector<std::string>>();
  rep.test.variables = j.at("variables").at("test").get<std::vector<std::string>>();
  auto read_pair = [&](const char* model, const char* aic_key, MetricBlock& b,
                       MetricBlock& t) {
    const json& m = j.at("models").at(model);
    const std::string provenance = m.at("provenance").get<std::string>();
    b = metric_from_json(m.at("baseline"), aic_key, provenance);
    t = metric_from_json(m.at("test"), aic_key, provenance);
  };
  read_pair("ols", "aic", rep.baseline.ols, rep.test.ols);
  read_pair("gwr", "aicc", rep.baseline.gwr, rep.test.gwr);
  read_pair("rf", "aic", rep.baseline.rf, rep.test.rf);
  read_pair("mlp", "aic", rep.baseline.mlp, rep.test.mlp);
  rep.baseline.ols_moran =
      moran_from_json(j.at("residual_moran").at("ols").at("baseline"));
  rep.test.ols_moran = moran_from_json(j.at("residual_moran").at("ols").at("test"));
  rep.baseline.gwr_moran =
      moran_from_json(j.at("residual_moran").at("gwr").at("baseline"));
  rep.test.gwr_moran = moran_from_json(j.at("residual_moran").at("gwr").at("test"));
  if (j.contains("ground_truth") && j.at("ground_truth").is_object()) {
    rep.ground_truth_fingerprint =
        j.at("ground_truth").at("fingerprint").get<std::string>();
  }
  return rep;
}

}  // namespace

std::string comparison_to_json(const ComparisonReport& report) {
  return comparison_json(report).dump(2) + "\n";
}

ExperimentState make_state(const ExperimentResult& result, const CbgTable& cbgs) {
  ExperimentState state;
  state.comparison = result.report;
  const std::size_t n = result.rates.rows.size();
  state.cbg_ids.reserve(n);
  for (const RateRow& row : result.rates.rows) {
    state.cbg_ids.push_back(row.cbg_id);
    state.polygons.push_back(cbgs.rows[cbgs.index_of(row.cbg_id)].polygon);
    state.dv_rate.push_back(row.dv_rate);
    for (std::size_t t = 0; t < 4; ++t) state.visit_rates[t].push_back(row.visit_rate[t]);
    state.population_density.push_back(row.population_density);
  }
  state.gwr_names = result.gwr_test.names;
  state.gwr_coef.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(result.gwr_test.local_coef.n_cols);
    for (std::size_t c = 0; c < result.gwr_test.local_coef.n_cols; ++c) {
      row[c] = result.gwr_test.local_coef(i, c);
    }
    state.gwr_coef.push_back(std::move(row));
  }
  auto to_std = [](const arma::vec& v) {
    return std::vector<double>(v.begin(), v.end());
  };
  state.gwr_std_resid = to_std(result.gwr_test.std_residuals);
  state.gwr_fitted = to_std(result.gwr_test.fitted);
  state.ols_std_resid = to_std(standardized_residuals(result.ols_test.residuals));
  state.predictions = {
      {"observed", to_std(result.baseline_features.target)},
      {"ols_baseline", to_std(result.ols_baseline.fitted)},
      {"ols_test", to_std(result.ols_test.fitted)},
      {"gwr_baseline", to_std(result.gwr_baseline.fitted)},
      {"gwr_test", to_std(result.gwr_test.fitted)},
      {"rf_baseline", to_std(result.rf_baseline.oof_pred)},
      {"rf_test", to_std(result.rf_test.oof_pred)},
      {"mlp_baseline", to_std(result.mlp_baseline.oof_pred)},
      {"mlp_test", to_std(result.mlp_test.oof_pred)},
  };
  return state;
}

std::string state_to_json(const ExperimentState& state) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "experiment_state";
  j["comparison"] = comparison_json(state.comparison);
  j["cbg_ids"] = state.cbg_ids;
  json polys = json::array();
  for (const Polygon& poly : state.polygons) polys.push_back(polygon_to_geojson(poly));
  j["polygons"] = std::move(polys);
  j["dv_rate"] = state.dv_rate;
  const std::vector<std::string> vr_names = visit_rate_variable_names();
  for (std::size_t t = 0; t < 4; ++t) j["visit_rates"][vr_names[t]] = state.visit_rates[t];
  j["population_density"] = state.population_density;
  j["gwr"] = json{{"names", state.gwr_names},
                  {"coef", state.gwr_coef},
                  {"std_resid", state.gwr_std_resid},
                  {"fitted", state.gwr_fitted}};
  j["ols_std_resid"] = state.ols_std_resid;
  json preds;
  json pred_order = json::array();
  for (const auto& [name, values] : state.predictions) {
    preds[name] = values;
    pred_order.push_back(name);
  }
  j["predictions"] = std::move(preds);
  j["prediction_order"] = std::move(pred_order);
  return j.dump(2) + "\n";
}

ExperimentState state_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  try {
    if (j.value("kind", "") != "experiment_state") {
      throw ValidationError(origin + ": not an experiment state file");
    }
    if (j.value("format_version", 0) != 1) {
      throw ValidationError(origin + ": unsupported format_version");
    }
    ExperimentState state;
    state.comparison = comparison_from_json(j.at("comparison"));
    state.cbg_ids = j.at("cbg_ids").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < j.at("polygons").size(); ++i) {
      state.polygons.push_back(polygon_from_geojson(
          j.at("polygons")[i], origin + ": polygon #" + fmt_int(i)));
    }
    state.dv_rate = j.at("dv_rate").get<std::vector<double>>();
    const std::vector<std::string> vr_names = visit_rate_variable_names();
    for (std::size_t t = 0; t < 4; ++t) {
      state.visit_rates[t] =
          j.at("visit_rates").at(vr_names[t]).get<std::vector<double>>();
    }
    state.population_density = j.at("population_density").get<std::vector<double>>();
    state.gwr_names = j.at("gwr").at("names").get<std::vector<std::string>>();
    state.gwr_coef = j.at("gwr").at("coef").get<std::vector<std::vector<double>>>();
    state.gwr_std_resid = j.at("gwr").at("std_resid").get<std::vector<double>>();
    state.gwr_fitted = j.at("gwr").at("fitted").get<std::vector<double>>();
    state.ols_std_resid = j.at("ols_std_resid").get<std::vector<double>>();
    for (const auto& name : j.at("prediction_order")) {
      state.predictions.emplace_back(
          name.get<std::string>(),
          j.at("predictions").at(name.get<std::string>()).get<std::vector<double>>());
    }
    return state;
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": malformed experiment state: " + e.what());
  }
}

void export_report(const ExperimentState& state, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const std::size_t n = state.cbg_ids.size();
  const std::vector<std::string> vr_names = visit_rate_variable_names();

  write_file(out_dir / "comparison.json", comparison_to_json(state.comparison));

  {
    RateTable rates;
    rates.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      RateRow row;
      row.cbg_id = state.cbg_ids[i];
      row.dv_rate = state.dv_rate[i];
      for (std::size_t t = 0; t < 4; ++t) row.visit_rate[t] = state.visit_rates[t][i];
      row.population_density = state.population_density[i];
      rates.rows.push_back(std::move(row));
    }
    write_file(out_dir / "rates.csv", rate_table_to_csv(rates));
  }

  {
    std::vector<GeoFeature> features(n);
    for (std::size_t i = 0; i < n; ++i) {
      features[i].polygon = state.polygons[i];
      features[i].properties["cbg_id"] = state.cbg_ids[i];
      features[i].properties["dv_rate"] = state.dv_rate[i];
      for (std::size_t t = 0; t < 4; ++t) {
        features[i].properties[vr_names[t]] = state.visit_rates[t][i];
      }
      features[i].properties["population_density"] = state.population_density[i];
    }
    write_file(out_dir / "rates.geojson", feature_collection_to_string(features));
  }

  {
    std::vector<GeoFeature> features(n);
    for (std::size_t i = 0; i < n; ++i) {
      features[i].polygon = state.polygons[i];
      features[i].properties["cbg_id"] = state.cbg_ids[i];
      for (std::size_t c = 0; c < state.gwr_names.size(); ++c) {
        features[i].properties["coef_" + state.gwr_names[c]] = state.gwr_coef[i][c];
      }
      features[i].properties["std_resid"] = state.gwr_std_resid[i];
      features[i].properties["local_pred"] = state.gwr_fitted[i];
    }
    write_file(out_dir / "gwr_local.geojson", feature_collection_to_string(features));
  }

  {
    std::vector<GeoFeature> features(n);
    for (std::size_t i = 0; i < n; ++i) {
      features[i].polygon = state.polygons[i];
      features[i].properties["cbg_id"] = state.cbg_ids[i];
      features[i].properties["std_resid_ols"] = state.ols_std_resid[i];
      features[i].properties["std_resid_gwr"] = state.gwr_std_resid[i];
    }
    write_file(out_dir / "residuals.geojson", feature_collection_to_string(features));
  }

  {
    std::vector<std::string> header{"cbg_id"};
    for (const auto& [name, values] : state.predictions) header.push_back(name);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row{state.cbg_ids[i]};
      for (const auto& [name, values] : state.predictions) {
        row.push_back(fmt_double(values[i]));
      }
      rows.push_back(std::move(row));
    }
    write_file(out_dir / "predicted_vs_observed.csv", to_csv(header, rows));
  }
}

}  // namespace areal
