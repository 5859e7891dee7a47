#include "areal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "areal/csv.hpp"
#include "areal/error.hpp"
#include "areal/geojson.hpp"
#include "areal/io.hpp"
#include "areal/log.hpp"
#include "areal/synth.hpp"
#include "areal/text.hpp"

namespace areal {
namespace {

using nlohmann::json;

void write_resolved(const PipelineConfig& cfg) {
  write_file(cfg.out / "resolved_config.json", resolved_config_text(cfg));
}

json issues_json(const std::vector<RowIssue>& issues) {
  json arr = json::array();
  for (const RowIssue& issue : issues) {
    arr.push_back(json{{"id", issue.id}, {"message", issue.message}});
  }
  return arr;
}

template <typename T>
json loaded_json(const Loaded<T>& loaded) {
  return json{{"input_rows", loaded.input_rows},
              {"accepted", loaded.accepted()},
              {"rejected", issues_json(loaded.rejected)}};
}

// Candidate pool for pruning: every declared attribute plus density.
std::vector<std::string> candidate_variables(const VariableSchema& schema) {
  std::vector<std::string> vars;
  for (const VariableDecl& decl : schema.variables) vars.push_back(decl.name);
  vars.push_back(kPopulationDensityVar);
  return vars;
}

struct SpatialFrame {
  std::vector<Polygon> polygons;   // eligible units, ascending cbg_id
  std::vector<Point> centroids;
  std::vector<std::string> row_ids;
};

SpatialFrame spatial_frame(const CbgTable& cbgs, const RateTable& rates) {
  SpatialFrame frame;
  frame.polygons.reserve(rates.rows.size());
  for (const RateRow& row : rates.rows) {
    const CbgRecord& rec = cbgs.rows[cbgs.index_of(row.cbg_id)];
    frame.polygons.push_back(rec.polygon);
    frame.centroids.push_back(polygon_centroid(rec.polygon));
    frame.row_ids.push_back(row.cbg_id);
  }
  return frame;
}

WeightsMatrix weights_of(const PipelineConfig& cfg, const SpatialFrame& frame) {
  if (cfg.weights_scheme == "knn") {
    return knn_weights(frame.centroids, cfg.weights_k);
  }
  return queen_weights(frame.polygons);
}

json moran_report_json(const MoranResult& m, const std::string& variable) {
  return json{{"variable", variable}, {"observed", m.observed},
              {"expected", m.expected}, {"z", m.z},
              {"p_normal", m.p_normal}, {"p_perm", m.p_perm},
              {"n_perm", m.n_perm},     {"n_used", m.n_used},
              {"scheme", m.scheme},     {"seed", m.seed}};
}

int resolve_gwr_bandwidth(const PipelineConfig& cfg, const FeatureMatrix& fm,
                          const SpatialFrame& frame, const GwrOptions& gopts,
                          BandwidthSearch* search_out) {
  if (cfg.gwr_bandwidth > 0) return cfg.gwr_bandwidth;
  const int p = static_cast<int>(fm.values.n_cols);
  const int n = static_cast<int>(fm.values.n_rows);
  const int k_min = cfg.gwr_k_min > 0 ? cfg.gwr_k_min : p + 3;
  const int k_max = cfg.gwr_k_max > 0 ? cfg.gwr_k_max : n - 1;
  const BandwidthSearch search =
      golden_search_bandwidth(fm.values, fm.target, fm.column_names(),
                              frame.centroids, k_min, k_max, gopts);
  if (search_out) *search_out = search;
  return search.best_k;
}

FoldSpec folds_of(const PipelineConfig& cfg, std::size_t n) {
  return kfold_split(n, cfg.cv_k, cfg.seed);
}

ModelSpec model_spec_of(const PipelineConfig& cfg, const std::string& model) {
  ModelSpec spec;
  if (model == "rf") {
    spec.kind = ModelSpec::Kind::rf;
    spec.rf = cfg.rf;
    spec.rf.seed = cfg.seed;
  } else if (model == "mlp") {
    spec.kind = ModelSpec::Kind::mlp;
    spec.mlp = cfg.mlp;
    spec.mlp.seed = cfg.seed;
  } else {
    throw ValidationError("unknown model '" + model + "' (expected rf or mlp)");
  }
  return spec;
}

json cv_json(const CvResult& cv) {
  json folds = json::array();
  for (const FoldDetail& d : cv.folds) {
    folds.push_back(json{{"fold", d.fold},
                         {"train_rows", d.train_rows},
                         {"test_rows", d.test_rows},
                         {"r2", d.r2},
                         {"rmse", d.rmse}});
  }
  return json{{"mean_r2", cv.mean_r2},
              {"pooled_rmse", cv.pooled_rmse},
              {"fold_hash", hex64(cv.fold_hash)},
              {"folds", std::move(folds)}};
}

struct DerivedFrame {
  RateTable rates;
  SpatialFrame frame;
  FeatureMatrix features;
};

DerivedFrame derive_for_models(const PipelineConfig& cfg, const Dataset& data,
                               bool include_visits,
                               std::vector<std::string> vars = {}) {
  DerivedFrame out;
  out.rates = derive_rates(data.cbgs, data.outlets, data.visits, data.dv_incidents,
                           cfg.rates);
  if (out.rates.rows.empty()) {
    throw ValidationError("no eligible units after rate derivation");
  }
  out.frame = spatial_frame(data.cbgs, out.rates);
  // Explicit model_variables are taken verbatim; otherwise the candidate
  // pool is VIF-pruned so the default fit matches the diagnose workflow.
  if (vars.empty()) vars = cfg.model_variables;
  if (vars.empty()) {
    const FeatureMatrix full =
        assemble_features(data.cbgs, out.rates, candidate_variables(data.schema),
                          data.schema, false);
    VifPruneOptions vopts;
    vopts.threshold = cfg.vif_threshold;
    vopts.composition_groups = data.schema.composition_groups;
    vopts.manual_drops = cfg.manual_drops;
    vopts.threads = cfg.threads;
    vars = vif_prune(full.values, full.column_names(), vopts).retained;
  }
  out.features = assemble_features(data.cbgs, out.rates, vars, data.schema,
                                   include_visits);
  return out;
}

void cmd_synth(const PipelineConfig& cfg) {
  if (cfg.synth.empty()) {
    throw ValidationError("synth needs a generator spec (--preset or config 'synth')");
  }
  const SynthConfig scfg =
      synth_config_from_json(cfg.synth.dump(), "generator spec");
  PipelineConfig echo = cfg;
  echo.synth = synth_config_to_json(scfg);
  write_resolved(echo);
  const SynthDataset dataset = generate(scfg);
  write_dataset(dataset, cfg.out);
  log_info("synth: wrote " + fmt_int(dataset.cbgs.rows.size()) + " units, " +
           fmt_int(dataset.pois.rows.size()) + " POIs, " +
           fmt_int(dataset.visits.rows.size()) + " visit rows, " +
           fmt_int(dataset.incidents.rows.size()) + " incidents to " +
           cfg.out.string());
}

void cmd_ingest_check(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  write_file(cfg.out / "ingest_report.json", loaded.ingest_report.dump(2) + "\n");
  log_info("ingest-check: report written to " +
           (cfg.out / "ingest_report.json").string());
}

void cmd_derive(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const Dataset& data = loaded.data;
  const RateTable rates = derive_rates(data.cbgs, data.outlets, data.visits,
                                       data.dv_incidents, cfg.rates);
  write_file(cfg.out / "rates.csv", rate_table_to_csv(rates));
  json excluded = json::array();
  for (const RateExclusion& ex : rates.excluded) {
    excluded.push_back(json{{"cbg_id", ex.cbg_id},
                            {"reason", ex.reason},
                            {"nonzero_incidents_dropped", ex.nonzero_incidents_dropped}});
    if (ex.nonzero_incidents_dropped) {
      log_warn("excluded unit " + ex.cbg_id + " (" + ex.reason +
               ") had incidents; they are dropped from all rates");
    }
  }
  const json report{{"eligible_units", rates.rows.size()},
                    {"excluded", std::move(excluded)},
                    {"assigned_incidents", rates.assigned_incidents},
                    {"unassigned_incidents", rates.unassigned_incidents}};
  write_file(cfg.out / "derive_report.json", report.dump(2) + "\n");
  log_info("derive: " + fmt_int(rates.rows.size()) + " eligible units, " +
           fmt_int(rates.excluded.size()) + " excluded; rates.csv written");
}

void cmd_diagnose(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const Dataset& data = loaded.data;
  // Diagnostics inspect the unpruned pool; pruning is what this command reports.
  const std::vector<std::string> pool = cfg.model_variables.empty()
                                            ? candidate_variables(data.schema)
                                            : cfg.model_variables;
  const DerivedFrame d = derive_for_models(cfg, data, cfg.include_visit_rates, pool);

  {
    CsvTable csv;
    csv.header = {"variable", "pearson_r", "pearson_p", "spearman_rho", "spearman_p"};
    const arma::mat raw = d.features.raw();
    for (std::size_t c = 0; c < raw.n_cols; ++c) {
      const arma::vec col = raw.col(c);
      const CorrelationResult pr = pearson(col, d.features.target);
      const CorrelationResult sr = spearman(col, d.features.target);
      csv.rows.push_back({d.features.columns[c].name, fmt_double(pr.coefficient),
                          fmt_double(pr.p_value), fmt_double(sr.coefficient),
                          fmt_double(sr.p_value)});
    }
    write_file(cfg.out / "correlations.csv", to_csv(csv.header, csv.rows));
  }

  {
    arma::vec values;
    if (cfg.moran_variable == "dv_rate") {
      values = d.features.target;
    } else {
      values = d.features.raw().col(d.features.col_index(cfg.moran_variable));
    }
    const WeightsMatrix w = weights_of(cfg, d.frame);
    const MoranResult m = morans_i(values, w, cfg.moran_n_perm, cfg.seed, cfg.threads);
    write_file(cfg.out / "moran.json",
               moran_report_json(m, cfg.moran_variable).dump(2) + "\n");
  }

  {
    // Pruning acts on the socioeconomic block only; visit rates join the
    // model after the baseline variable set is settled.
    const FeatureMatrix base =
        assemble_features(data.cbgs, d.rates, pool, data.schema, false);
    VifPruneOptions vopts;
    vopts.threshold = cfg.vif_threshold;
    vopts.composition_groups = data.schema.composition_groups;
    vopts.manual_drops = cfg.manual_drops;
    vopts.threads = cfg.threads;
    const VifReport report = vif_prune(base.values, base.column_names(), vopts);

    CsvTable csv;
    csv.header = {"variable"};
    for (std::size_t r = 0; r < report.rounds.size(); ++r) {
      csv.header.push_back("round_" + fmt_int(r + 1));
    }
    csv.header.push_back("status");
    for (const std::string& name : base.column_names()) {
      std::vector<std::string> row{name};
      for (const auto& round : report.rounds) {
        const auto it = round.find(name);
        row.push_back(it == round.end() ? "" : fmt_double(it->second));
      }
      std::string status = "retained";
      for (const VifDropEvent& ev : report.dropped) {
        if (ev.variable == name) {
          status = "dropped:" + ev.reason;
          break;
        }
      }
      row.push_back(status);
      csv.rows.push_back(std::move(row));
    }
    write_file(cfg.out / "vif_report.csv", to_csv(csv.header, csv.rows));
    log_info("diagnose: " + fmt_int(report.retained.size()) +
             " variables retained after pruning");
  }
}

void cmd_fit_ols(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const DerivedFrame d = derive_for_models(cfg, loaded.data, cfg.include_visit_rates);
  const OlsFit fit =
      ols_fit(d.features.values, d.features.target, d.features.column_names());

  CsvTable csv;
  csv.header = {"variable", "coefficient", "std_err", "t", "p"};
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    csv.rows.push_back({fit.names[i], fmt_double(fit.coef(i)), fmt_double(fit.se(i)),
                        fmt_double(fit.tstat(i)), fmt_double(fit.pvalue(i))});
  }
  write_file(cfg.out / "ols_fit.csv", to_csv(csv.header, csv.rows));
  const json summary{{"n", fit.n},         {"p", fit.p},   {"r2", fit.r2},
                     {"adj_r2", fit.adj_r2}, {"aic", fit.aic}, {"rmse", fit.rmse}};
  write_file(cfg.out / "ols_summary.json", summary.dump(2) + "\n");
  log_info("fit-ols: R2=" + fmt_double(fit.r2) + " adj_R2=" + fmt_double(fit.adj_r2) +
           " AIC=" + fmt_double(fit.aic));
}

void cmd_fit_gwr(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const DerivedFrame d = derive_for_models(cfg, loaded.data, cfg.include_visit_rates);
  GwrOptions gopts;
  gopts.force_uniform = cfg.gwr_force_uniform;
  gopts.fixed_bandwidth_m = cfg.gwr_fixed_bandwidth_m;
  gopts.threads = cfg.threads;

  BandwidthSearch search;
  const bool searched = cfg.gwr_bandwidth <= 0;
  const int k = resolve_gwr_bandwidth(cfg, d.features, d.frame, gopts, &search);
  const GwrFit fit = gwr_fit(d.features.values, d.features.target,
                             d.features.column_names(), d.frame.centroids, k, gopts,
                             d.frame.row_ids);

  std::vector<GeoFeature> features(fit.n);
  for (std::size_t i = 0; i < fit.n; ++i) {
    features[i].polygon = d.frame.polygons[i];
    features[i].properties["cbg_id"] = d.frame.row_ids[i];
    for (std::size_t c = 0; c < fit.names.size(); ++c) {
      features[i].properties["coef_" + fit.names[c]] = fit.local_coef(i, c);
    }
    features[i].properties["std_resid"] = fit.std_residuals(i);
    features[i].properties["local_pred"] = fit.fitted(i);
  }
  write_file(cfg.out / "gwr_local.geojson", feature_collection_to_string(features));

  json summary;
  summary["bandwidth"] = fit.bandwidth;
  summary["tr_S"] = fit.tr_s;
  summary["tr_StS"] = fit.tr_sts;
  summary["enp"] = fit.enp;
  summary["aicc"] = fit.aicc;
  summary["r2"] = fit.r2;
  summary["adj_r2"] = fit.adj_r2;
  summary["rmse"] = std::sqrt(fit.rss / static_cast<double>(fit.n));
  json edges;
  for (std::size_t c = 0; c < fit.names.size(); ++c) {
    std::vector<double> col(fit.n);
    for (std::size_t i = 0; i < fit.n; ++i) col[i] = fit.local_coef(i, c);
    edges["coef_" + fit.names[c]] = jenks_breaks(col, 6);
  }
  summary["class_edges"] = std::move(edges);
  if (searched) {
    json profile;
    for (const auto& [kk, aicc] : search.profile) profile[fmt_int(kk)] = aicc;
    json failures;
    for (const auto& [kk, msg] : search.failures) failures[fmt_int(kk)] = msg;
    summary["search"] = json{{"profile", std::move(profile)},
                             {"failures", std::move(failures)}};
  }
  write_file(cfg.out / "gwr_summary.json", summary.dump(2) + "\n");
  log_info("fit-gwr: bandwidth=" + fmt_int(fit.bandwidth) + " AICc=" +
           fmt_double(fit.aicc) + " R2=" + fmt_double(fit.r2));
}

void cmd_fit_rf(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const DerivedFrame d = derive_for_models(cfg, loaded.data, cfg.include_visit_rates);
  const FoldSpec folds = folds_of(cfg, d.features.values.n_rows);
  const arma::mat X = cfg.prestandardized ? d.features.values : d.features.raw();

  ModelSpec spec = model_spec_of(cfg, "rf");
  json grid;
  if (cfg.rf_grid) {
    const RfGridResult result =
        rf_grid_search(X, d.features.target, default_n_tree_grid(),
                       std::vector<MtryRule>(kMtryRules.begin(), kMtryRules.end()),
                       folds, derive_seed(cfg.seed, 7), cfg.threads);
    spec.rf.n_tree = result.best.n_tree;
    spec.rf.m_try = result.best.m_try;
    json table = json::array();
    for (const RfGridCell& cell : result.table) {
      table.push_back(json{{"n_tree", cell.n_tree},
                           {"m_try", mtry_rule_name(cell.m_try)},
                           {"mean_r2", cell.mean_r2},
                           {"pooled_rmse", cell.pooled_rmse}});
    }
    grid = json{{"best", json{{"n_tree", result.best.n_tree},
                              {"m_try", mtry_rule_name(result.best.m_try)}}},
                {"table", std::move(table)}};
  }

  CvOptions cvo;
  cvo.prestandardized = cfg.prestandardized;
  cvo.threads = cfg.threads;
  const CvResult cv = cross_validate(spec, X, d.features.target, folds, cvo);

  CsvTable csv;
  csv.header = {"variable", "mean_importance"};
  for (int f = 0; f < folds.k; ++f) csv.header.push_back("fold_" + fmt_int(f));
  const std::vector<std::string> names = d.features.column_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    double sum = 0.0;
    std::vector<std::string> cells;
    for (const FoldDetail& detail : cv.folds) {
      const double v = detail.importance_defined ? detail.importance(c) : 0.0;
      sum += v;
      cells.push_back(fmt_double(v));
    }
    std::vector<std::string> row{names[c],
                                 fmt_double(sum / static_cast<double>(folds.k))};
    row.insert(row.end(), cells.begin(), cells.end());
    csv.rows.push_back(std::move(row));
  }
  write_file(cfg.out / "rf_importance.csv", to_csv(csv.header, csv.rows));

  RfConfig full_cfg = spec.rf;
  full_cfg.seed = cfg.seed;
  const RfModel model = rf_train(d.features.values, d.features.target, full_cfg,
                                 cfg.threads);
  write_file(cfg.out / "rf_model.json", rf_model_to_json(model));

  json summary{{"config", json{{"n_tree", full_cfg.n_tree},
                               {"m_try", mtry_rule_name(full_cfg.m_try)},
                               {"min_leaf", full_cfg.min_leaf},
                               {"max_depth", full_cfg.max_depth},
                               {"bootstrap", full_cfg.bootstrap}}},
               {"cv", cv_json(cv)},
               {"importance_defined", model.importance_defined}};
  if (!grid.empty()) summary["grid"] = std::move(grid);
  write_file(cfg.out / "rf_summary.json", summary.dump(2) + "\n");
  log_info("fit-rf: cv mean R2=" + fmt_double(cv.mean_r2) + " pooled RMSE=" +
           fmt_double(cv.pooled_rmse));
}

void cmd_fit_mlp(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const DerivedFrame d = derive_for_models(cfg, loaded.data, cfg.include_visit_rates);
  const FoldSpec folds = folds_of(cfg, d.features.values.n_rows);
  const arma::mat X = cfg.prestandardized ? d.features.values : d.features.raw();

  const ModelSpec spec = model_spec_of(cfg, "mlp");
  CvOptions cvo;
  cvo.prestandardized = cfg.prestandardized;
  cvo.threads = cfg.threads;
  const CvResult cv = cross_validate(spec, X, d.features.target, folds, cvo);

  MlpConfig full_cfg = spec.mlp;
  full_cfg.seed = cfg.seed;
  const MlpModel model = mlp_train(d.features.values, d.features.target, full_cfg);
  write_file(cfg.out / "mlp_model.json", mlp_model_to_json(model));

  const json summary{{"config", json{{"layers", full_cfg.layers},
                                     {"dropout", full_cfg.dropout},
                                     {"epochs", full_cfg.epochs},
                                     {"batch", full_cfg.batch},
                                     {"learning_rate", full_cfg.learning_rate},
                                     {"lr_decay", full_cfg.lr_decay}}},
                     {"cv", cv_json(cv)}};
  write_file(cfg.out / "mlp_summary.json", summary.dump(2) + "\n");
  log_info("fit-mlp: cv mean R2=" + fmt_double(cv.mean_r2) + " pooled RMSE=" +
           fmt_double(cv.pooled_rmse));
}

void cmd_cv(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);
  const DerivedFrame d = derive_for_models(cfg, loaded.data, cfg.include_visit_rates);
  const FoldSpec folds = folds_of(cfg, d.features.values.n_rows);
  const arma::mat X = cfg.prestandardized ? d.features.values : d.features.raw();
  const ModelSpec spec = model_spec_of(cfg, cfg.cv_model);
  CvOptions cvo;
  cvo.prestandardized = cfg.prestandardized;
  cvo.threads = cfg.threads;
  const CvResult cv = cross_validate(spec, X, d.features.target, folds, cvo);
  json out = cv_json(cv);
  out["model"] = cfg.cv_model;
  out["k"] = cfg.cv_k;
  out["seed"] = cfg.seed;
  out["prestandardized"] = cfg.prestandardized;
  write_file(cfg.out / "cv_results.json", out.dump(2) + "\n");
  log_info("cv: " + cfg.cv_model + " mean R2=" + fmt_double(cv.mean_r2) +
           " pooled RMSE=" + fmt_double(cv.pooled_rmse));
}

void cmd_experiment(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const LoadedDataset loaded = load_dataset(cfg);

  ExperimentOptions opts;
  opts.seed = cfg.seed;
  opts.cv_k = cfg.cv_k;
  opts.n_perm = cfg.moran_n_perm;
  opts.vif_threshold = cfg.vif_threshold;
  opts.manual_drops = cfg.manual_drops;
  opts.rates = cfg.rates;
  opts.rf = cfg.rf;
  opts.mlp = cfg.mlp;
  opts.gwr_k_min = cfg.gwr_k_min;
  opts.gwr_k_max = cfg.gwr_k_max;
  opts.prestandardized = cfg.prestandardized;
  opts.threads = cfg.threads;
  const std::filesystem::path truth_path =
      cfg.cbgs.parent_path() / "ground_truth.json";
  if (std::filesystem::exists(truth_path)) {
    opts.ground_truth_fingerprint = file_fingerprint(truth_path);
  }

  const ExperimentResult result = run_experiment(loaded.data, opts);
  const ExperimentState state = make_state(result, loaded.data.cbgs);
  export_report(state, cfg.out);
  write_file(cfg.out / "experiment_state.json", state_to_json(state));

  const ComparisonReport& rep = result.report;
  log_info("experiment: OLS adj R2 " + fmt_double(rep.baseline.ols.adj_r2) + " -> " +
           fmt_double(rep.test.ols.adj_r2) + ", GWR R2 " +
           fmt_double(rep.baseline.gwr.r2) + " -> " + fmt_double(rep.test.gwr.r2));
  log_info("experiment: RF cv R2 " + fmt_double(rep.baseline.rf.r2) + " -> " +
           fmt_double(rep.test.rf.r2) + ", MLP cv R2 " +
           fmt_double(rep.baseline.mlp.r2) + " -> " + fmt_double(rep.test.mlp.r2));
}

void cmd_export(const PipelineConfig& cfg) {
  write_resolved(cfg);
  const std::filesystem::path state_path =
      cfg.state.empty() ? cfg.out / "experiment_state.json" : cfg.state;
  const ExperimentState state =
      state_from_json(read_file(state_path), state_path.string());
  export_report(state, cfg.out);
  log_info("export: report files rewritten from " + state_path.string());
}

}  // namespace

LoadedDataset load_dataset(const PipelineConfig& cfg) {
  LoadedDataset out;
  const VariableSchema schema = read_variable_schema(cfg.variables);
  Loaded<CbgTable> cbgs = load_cbgs(cfg.cbgs, schema.variables);
  Loaded<PoiTable> pois = load_pois(cfg.pois);
  Loaded<VisitTable> visits = load_visits(cfg.visits);
  Loaded<IncidentTable> incidents = load_incidents(cfg.incidents);

  for (const auto& [table, name] :
       std::initializer_list<std::pair<const std::vector<RowIssue>*, const char*>>{
           {&cbgs.rejected, "cbgs"},
           {&pois.rejected, "pois"},
           {&visits.rejected, "visits"},
           {&incidents.rejected, "incidents"}}) {
    for (const RowIssue& issue : *table) {
      log_warn(std::string(name) + " row '" + issue.id + "' rejected: " +
               issue.message);
    }
  }

  const std::set<std::string> codes(cfg.naics_codes.begin(), cfg.naics_codes.end());
  std::vector<OutletPoi> outlets =
      filter_alcohol_pois(pois.table, codes, default_naics_map());
  const std::set<std::string> dv_types(cfg.dv_types.begin(), cfg.dv_types.end());
  const std::set<std::string> homes(cfg.home_locations.begin(),
                                    cfg.home_locations.end());
  DvFilterResult dv = filter_dv_incidents(incidents.table, dv_types, homes);
  const LinkReport link = link_check(cbgs.table, pois.table, visits.table);
  if (!link.clean()) {
    log_warn("link check: " + fmt_int(link.unknown_poi_rows) +
             " visit rows with unknown POIs, " + fmt_int(link.unknown_cbg_rows) +
             " with unknown units");
  }

  log_info("loaded " + fmt_int(cbgs.accepted()) + " units, " +
           fmt_int(pois.accepted()) + " POIs (" + fmt_int(outlets.size()) +
           " outlets), " + fmt_int(visits.accepted()) + " visit rows, " +
           fmt_int(dv.kept.rows.size()) + " DV incidents of " +
           fmt_int(incidents.accepted()));

  out.ingest_report =
      json{{"cbgs", loaded_json(cbgs)},
           {"pois", loaded_json(pois)},
           {"visits", loaded_json(visits)},
           {"incidents", loaded_json(incidents)},
           {"outlets", outlets.size()},
           {"dv_filter", json{{"input", dv.input},
                              {"kept", dv.kept.rows.size()},
                              {"removed_not_domestic", dv.removed_not_domestic},
                              {"removed_type", dv.removed_type},
                              {"removed_location", dv.removed_location}}},
           {"link", json{{"unknown_poi_rows", link.unknown_poi_rows},
                         {"unknown_cbg_rows", link.unknown_cbg_rows},
                         {"sample_unknown_pois", link.sample_unknown_pois},
                         {"sample_unknown_cbgs", link.sample_unknown_cbgs}}}};

  out.data.cbgs = std::move(cbgs.table);
  out.data.schema = schema;
  out.data.outlets = std::move(outlets);
  out.data.visits = std::move(visits.table);
  out.data.dv_incidents = std::move(dv.kept);
  return out;
}

void run_command(const std::string& command, const PipelineConfig& cfg) {
  set_verbose(cfg.verbose);
  ensure_dir(cfg.out);
  if (command == "synth") {
    cmd_synth(cfg);
  } else if (command == "ingest-check") {
    cmd_ingest_check(cfg);
  } else if (command == "derive") {
    cmd_derive(cfg);
  } else if (command == "diagnose") {
    cmd_diagnose(cfg);
  } else if (command == "fit-ols") {
    cmd_fit_ols(cfg);
  } else if (command == "fit-gwr") {
    cmd_fit_gwr(cfg);
  } else if (command == "fit-rf") {
    cmd_fit_rf(cfg);
  } else if (command == "fit-mlp") {
    cmd_fit_mlp(cfg);
  } else if (command == "cv") {
    cmd_cv(cfg);
  } else if (command == "experiment") {
    cmd_experiment(cfg);
  } else if (command == "export") {
    cmd_export(cfg);
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }
}

}  // namespace areal
