#include "areal/config.hpp"

#include <set>

#include "areal/error.hpp"
#include "areal/ingest.hpp"

namespace areal {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "format_version", "inputs",  "out",    "state",   "seed",
      "threads",        "verbose", "naics_codes", "dv_filter", "rates",
      "weights",        "moran",   "vif",    "model_variables",
      "include_visit_rates", "gwr", "rf",    "mlp",     "cv",
      "prestandardized", "synth"};
  return keys;
}

}  // namespace

PipelineConfig default_config() {
  PipelineConfig cfg;
  for (const auto& [code, type] : default_naics_map()) {
    (void)type;
    cfg.naics_codes.push_back(code);
  }
  cfg.dv_types.assign(default_dv_types().begin(), default_dv_types().end());
  cfg.home_locations.assign(default_home_locations().begin(),
                            default_home_locations().end());
  return cfg;
}

PipelineConfig config_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(origin + ": config must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known_keys().count(key)) {
      throw ValidationError(origin + ": unknown config key '" + key + "'");
    }
  }
  if (j.contains("format_version") && j["format_version"].get<int>() != 1) {
    throw ValidationError(origin + ": unsupported config format_version");
  }

  PipelineConfig cfg = default_config();
  try {
    if (j.contains("inputs")) {
      const json& in = j.at("inputs");
      auto path = [&](const char* key, std::filesystem::path& slot) {
        if (in.contains(key)) slot = in.at(key).get<std::string>();
      };
      path("cbgs", cfg.cbgs);
      path("pois", cfg.pois);
      path("visits", cfg.visits);
      path("incidents", cfg.incidents);
      path("variables", cfg.variables);
    }
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("state")) cfg.state = j.at("state").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("verbose")) cfg.verbose = j.at("verbose").get<bool>();
    if (j.contains("naics_codes")) {
      cfg.naics_codes = j.at("naics_codes").get<std::vector<std::string>>();
    }
    if (j.contains("dv_filter")) {
      const json& f = j.at("dv_filter");
      if (f.contains("types")) {
        cfg.dv_types = f.at("types").get<std::vector<std::string>>();
      }
      if (f.contains("home_locations")) {
        cfg.home_locations = f.at("home_locations").get<std::vector<std::string>>();
      }
    }
    if (j.contains("rates")) {
      const json& r = j.at("rates");
      if (r.contains("min_pop")) cfg.rates.min_pop = r.at("min_pop").get<std::int64_t>();
      if (r.contains("min_devices")) {
        cfg.rates.min_devices = r.at("min_devices").get<std::int64_t>();
      }
    }
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      if (w.contains("scheme")) cfg.weights_scheme = w.at("scheme").get<std::string>();
      if (w.contains("k")) cfg.weights_k = w.at("k").get<int>();
    }
    if (j.contains("moran")) {
      const json& m = j.at("moran");
      if (m.contains("n_perm")) cfg.moran_n_perm = m.at("n_perm").get<int>();
      if (m.contains("variable")) {
        cfg.moran_variable = m.at("variable").get<std::string>();
      }
    }
    if (j.contains("vif")) {
      const json& v = j.at("vif");
      if (v.contains("threshold")) cfg.vif_threshold = v.at("threshold").get<double>();
      if (v.contains("manual_drops")) {
        cfg.manual_drops = v.at("manual_drops").get<std::vector<std::string>>();
      }
    }
    if (j.contains("model_variables")) {
      cfg.model_variables = j.at("model_variables").get<std::vector<std::string>>();
    }
    if (j.contains("include_visit_rates")) {
      cfg.include_visit_rates = j.at("include_visit_rates").get<bool>();
    }
    if (j.contains("gwr")) {
      const json& g = j.at("gwr");
      if (g.contains("k_min")) cfg.gwr_k_min = g.at("k_min").get<int>();
      if (g.contains("k_max")) cfg.gwr_k_max = g.at("k_max").get<int>();
      if (g.contains("bandwidth")) cfg.gwr_bandwidth = g.at("bandwidth").get<int>();
      if (g.contains("force_uniform")) {
        cfg.gwr_force_uniform = g.at("force_uniform").get<bool>();
      }
      if (g.contains("fixed_bandwidth_m")) {
        cfg.gwr_fixed_bandwidth_m = g.at("fixed_bandwidth_m").get<double>();
      }
    }
    if (j.contains("rf")) {
      const json& r = j.at("rf");
      if (r.contains("n_tree")) cfg.rf.n_tree = r.at("n_tree").get<int>();
      if (r.contains("m_try")) {
        cfg.rf.m_try = mtry_rule_from_name(r.at("m_try").get<std::string>());
      }
      if (r.contains("min_leaf")) cfg.rf.min_leaf = r.at("min_leaf").get<int>();
      if (r.contains("max_depth")) cfg.rf.max_depth = r.at("max_depth").get<int>();
      if (r.contains("bootstrap")) cfg.rf.bootstrap = r.at("bootstrap").get<bool>();
      if (r.contains("grid_search")) cfg.rf_grid = r.at("grid_search").get<bool>();
    }
    if (j.contains("mlp")) {
      const json& m = j.at("mlp");
      if (m.contains("layers")) cfg.mlp.layers = m.at("layers").get<std::vector<int>>();
      if (m.contains("dropout")) {
        cfg.mlp.dropout = m.at("dropout").get<std::vector<double>>();
      }
      if (m.contains("epochs")) cfg.mlp.epochs = m.at("epochs").get<int>();
      if (m.contains("batch")) cfg.mlp.batch = m.at("batch").get<int>();
      if (m.contains("learning_rate")) {
        cfg.mlp.learning_rate = m.at("learning_rate").get<double>();
      }
      if (m.contains("lr_decay")) cfg.mlp.lr_decay = m.at("lr_decay").get<double>();
    }
    if (j.contains("cv")) {
      const json& c = j.at("cv");
      if (c.contains("k")) cfg.cv_k = c.at("k").get<int>();
      if (c.contains("model")) cfg.cv_model = c.at("model").get<std::string>();
    }
    if (j.contains("prestandardized")) {
      cfg.prestandardized = j.at("prestandardized").get<bool>();
    }
    if (j.contains("synth")) {
      if (!j.at("synth").is_object()) {
        throw ValidationError(origin + ": 'synth' must be an object");
      }
      cfg.synth = j.at("synth");
    }
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": malformed config: " + e.what());
  }

  if (cfg.threads < 1) throw ValidationError(origin + ": threads must be >= 1");
  if (cfg.weights_scheme != "queen" && cfg.weights_scheme != "knn") {
    throw ValidationError(origin + ": weights scheme must be 'queen' or 'knn'");
  }
  if (cfg.cv_model != "rf" && cfg.cv_model != "mlp") {
    throw ValidationError(origin + ": cv model must be 'rf' or 'mlp'");
  }
  return cfg;
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["format_version"] = 1;
  j["inputs"] = json{{"cbgs", cfg.cbgs.string()},
                     {"pois", cfg.pois.string()},
                     {"visits", cfg.visits.string()},
                     {"incidents", cfg.incidents.string()},
                     {"variables", cfg.variables.string()}};
  j["out"] = cfg.out.string();
  j["state"] = cfg.state.string();
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["verbose"] = cfg.verbose;
  j["naics_codes"] = cfg.naics_codes;
  j["dv_filter"] =
      json{{"types", cfg.dv_types}, {"home_locations", cfg.home_locations}};
  j["rates"] =
      json{{"min_pop", cfg.rates.min_pop}, {"min_devices", cfg.rates.min_devices}};
  j["weights"] = json{{"scheme", cfg.weights_scheme}, {"k", cfg.weights_k}};
  j["moran"] = json{{"n_perm", cfg.moran_n_perm}, {"variable", cfg.moran_variable}};
  j["vif"] = json{{"threshold", cfg.vif_threshold}, {"manual_drops", cfg.manual_drops}};
  j["model_variables"] = cfg.model_variables;
  j["include_visit_rates"] = cfg.include_visit_rates;
  j["gwr"] = json{{"k_min", cfg.gwr_k_min},
                  {"k_max", cfg.gwr_k_max},
                  {"bandwidth", cfg.gwr_bandwidth},
                  {"force_uniform", cfg.gwr_force_uniform},
                  {"fixed_bandwidth_m", cfg.gwr_fixed_bandwidth_m}};
  j["rf"] = json{{"n_tree", cfg.rf.n_tree},
                 {"m_try", mtry_rule_name(cfg.rf.m_try)},
                 {"min_leaf", cfg.rf.min_leaf},
                 {"max_depth", cfg.rf.max_depth},
                 {"bootstrap", cfg.rf.bootstrap},
                 {"grid_search", cfg.rf_grid}};
  j["mlp"] = json{{"layers", cfg.mlp.layers},
                  {"dropout", cfg.mlp.dropout},
                  {"epochs", cfg.mlp.epochs},
                  {"batch", cfg.mlp.batch},
                  {"learning_rate", cfg.mlp.learning_rate},
                  {"lr_decay", cfg.mlp.lr_decay}};
  j["cv"] = json{{"k", cfg.cv_k}, {"model", cfg.cv_model}};
  j["prestandardized"] = cfg.prestandardized;
  j["synth"] = cfg.synth;
  return j;
}

std::string resolved_config_text(const PipelineConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

}  // namespace areal
