#pragma once

// Experiment configuration: a JSON document with the sections
//   experiment, validation_mode, seed, potential, integrator, model,
//   grids, orbit, successor, scaling, sweep, gentrig, output.
// Grids are arrays of numbers or {"log": [lo, hi, count]} / {"linear": [lo, hi, count]}.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "impactosc/integrator.hpp"
#include "impactosc/maps.hpp"

namespace impactosc {

struct OrbitSettings {
    double x0 = 1.0;
    double v0 = 0.0;
    double t0 = 0.0;
    double t_end = 20.0;
    double sample_dt = 0.01;
};

struct SuccessorSettings {
    std::size_t iterates = 2000;
    std::size_t fit_iterates = 1000;
    int harmonics = 12;
    double tolerance = 1e-3;
};

struct ScalingSettings {
    std::vector<std::string> which{"f1", "f2"};  ///< any of R, f1, f2
    int max_order = 3;
    double residual_bound = 0.4;  ///< claimed lower bound on the f1, f2 slopes
    double derivative_slack = 0.15;
};

struct SweepSettings {
    double horizon = 1000.0;
    int checkpoints = 10;
    double threshold = 1.5;
    std::vector<PhaseState> ics;  ///< explicit ICs; otherwise the energy ladder below
    double e_min = 10.0;
    double e_max = 1e4;
    std::size_t count = 20;
};

struct GentrigSettings {
    std::vector<int> n_values{1, 2, 3};
    std::size_t samples = 4096;
    double tol = 1e-12;
};

struct OutputSettings {
    std::string directory = "out";
    bool csv = true;
    bool svg = true;
};

struct ExperimentConfig {
    std::string experiment;
    bool validation_mode = false;
    std::uint64_t seed = 0;

    PotentialSpec potential;
    IntegratorOptions integrator;
    std::size_t table_intervals = 1024;
    double i_min = 50.0;
    double fd_delta = 1e-3;
    Backend backend = Backend::Physical;
    bool compare_backends = false;

    std::vector<double> eps;
    std::vector<double> upsilon0;
    std::vector<double> theta0;
    std::vector<double> I;
    std::vector<double> tau;

    OrbitSettings orbit;
    SuccessorSettings successor;
    ScalingSettings scaling;
    SweepSettings sweep;
    GentrigSettings gentrig;
    OutputSettings output;

    nlohmann::json source;  ///< the document as read, echoed into the manifest
};

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"gentrig-check", "orbit", "successor", "poincare", "scaling", "sweep"};
    return names;
}

/// Parses JSON text; ConfigError with line and column on a syntax error.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/// Reads and parses a file.
nlohmann::json read_json_file(const std::filesystem::path& path);

struct ConfigCheck {
    ExperimentConfig config;
    std::vector<std::string> violations;
};

/// Interprets the document and lists every violated invariant.
ConfigCheck check_config(const nlohmann::json& doc);

/// check_config, throwing ConfigError with all violations when there are any.
ExperimentConfig load_config(const nlohmann::json& doc);

}  // namespace impactosc
