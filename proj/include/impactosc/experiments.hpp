#pragma once

// Runs one configured experiment and writes its CSV and SVG artifacts plus
// manifest.json into the output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "impactosc/config.hpp"

namespace impactosc {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  ///< overrides output.directory
    int jobs = 0;                                  ///< 0: all available threads
    std::optional<std::uint64_t> seed;             ///< overrides the config seed
    std::string config_path;                       ///< echoed into the manifest
};

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<std::string> files;  ///< relative to out_dir, manifest.json last
    nlohmann::json summary;          ///< headline numbers, also in the manifest
    bool checks_passed = true;       ///< every built-in check of the experiment held
    std::vector<std::string> notes;  ///< human-readable check results
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace impactosc
