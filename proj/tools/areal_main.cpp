#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "areal/config.hpp"
#include "areal/error.hpp"
#include "areal/io.hpp"
#include "areal/log.hpp"
#include "areal/pipeline.hpp"
#include "areal/version.hpp"

namespace {

struct CommandDef {
  const char* name;
  const char* description;
};

constexpr CommandDef kCommands[] = {
    {"synth", "Generate a synthetic dataset with ground truth"},
    {"ingest-check", "Load and validate the input files, write an ingest report"},
    {"derive", "Derive DV and visit rates into rates.csv"},
    {"diagnose", "Correlations, Moran's I, and VIF pruning report"},
    {"fit-ols", "Fit the global least-squares model"},
    {"fit-gwr", "Fit the geographically weighted model"},
    {"fit-rf", "Cross-validate and fit the random forest"},
    {"fit-mlp", "Cross-validate and fit the neural network"},
    {"cv", "Cross-validate one model family"},
    {"experiment", "Run the baseline-vs-test comparison and export reports"},
    {"export", "Rewrite report files from a saved experiment state"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"areal: neighborhood alcohol-outlet visitation and domestic-violence "
               "rate modeling toolkit"};
  const std::string version =
      std::string("areal ") + areal::kVersion + " (config format " +
      std::to_string(areal::kConfigFormatVersion) + ", model format " +
      std::to_string(areal::kModelDumpFormatVersion) + ")";
  app.set_version_flag("--version", version);
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::string state_path;
  std::uint64_t seed = 0;
  int threads = 1;
  bool verbose = false;

  std::vector<CLI::App*> subs;
  for (const CommandDef& def : kCommands) {
    CLI::App* sub = app.add_subcommand(def.name, def.description);
    sub->add_option("--config", config_path, "Pipeline config JSON");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for every stochastic step");
    sub->add_option("--threads", threads, "Worker thread cap");
    sub->add_flag("--verbose", verbose, "Chatty logging");
    if (std::string(def.name) == "synth") {
      sub->add_option("--preset", preset, "Generator preset (paper-like, heterogeneous)");
    }
    if (std::string(def.name) == "export") {
      sub->add_option("--state", state_path, "Saved experiment state JSON");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR " << e.what() << "\n" << app.help() << std::flush;
    return 64;
  }

  CLI::App* active = nullptr;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) active = sub;
  }
  if (!active) {
    std::cerr << app.help() << std::flush;
    return 64;
  }

  try {
    areal::PipelineConfig cfg;
    if (active->count("--config") > 0) {
      cfg = areal::config_from_json(areal::read_file(config_path), config_path);
    } else {
      cfg = areal::default_config();
    }
    if (active->count("--out") > 0) cfg.out = out_dir;
    if (active->count("--seed") > 0) cfg.seed = seed;
    if (active->count("--threads") > 0) cfg.threads = threads;
    if (active->count("--verbose") > 0) cfg.verbose = true;
    if (active->get_name() == "export" && active->count("--state") > 0) {
      cfg.state = state_path;
    }
    if (active->get_name() == "synth") {
      if (active->count("--preset") > 0) {
        cfg.synth = nlohmann::json{{"preset", preset}};
        cfg.synth["seed"] = cfg.seed;
      } else if (active->count("--seed") > 0 && cfg.synth.is_object() &&
                 !cfg.synth.empty()) {
        cfg.synth["seed"] = seed;
      }
    }
    areal::run_command(active->get_name(), cfg);
    return 0;
  } catch (const areal::ValidationError& e) {
    areal::log_error(e.what());
    return 1;
  } catch (const areal::NumericError& e) {
    areal::log_error(e.what());
    return 2;
  } catch (const areal::IoError& e) {
    areal::log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    areal::log_error(std::string("unexpected: ") + e.what());
    return 2;
  }
}
