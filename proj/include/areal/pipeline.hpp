#pragma once

#include <string>

#include "areal/config.hpp"
#include "areal/eval.hpp"

namespace areal {

// Loads and cross-filters the five input files; logs acceptance counts.
struct LoadedDataset {
  Dataset data;
  nlohmann::json ingest_report;
};

LoadedDataset load_dataset(const PipelineConfig& cfg);

// Executes one pipeline command. Writes <out>/resolved_config.json plus the
// command's own artifacts. Throws Validation/Numeric/IoError on failure;
// unknown command names are a ValidationError (the CLI screens them first).
void run_command(const std::string& command, const PipelineConfig& cfg);

}  // namespace areal
