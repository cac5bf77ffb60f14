// impactosc: run or validate an experiment configuration.
//
// Exit status: 0 success, 1 runtime error, 2 invalid configuration,
// 3 the run completed but one of its built-in checks failed.

#include <iostream>

#include "CLI11.hpp"

#include "impactosc/config.hpp"
#include "impactosc/error.hpp"
#include "impactosc/experiments.hpp"

namespace {

int validate(const std::string& path)
{
    nlohmann::json doc;
    try {
        doc = impactosc::read_json_file(path);
    } catch (const impactosc::ConfigError& e) {
        std::cout << path << ": 1 violation\n  " << e.what() << '\n';
        return 2;
    }
    const auto check = impactosc::check_config(doc);
    if (check.violations.empty()) {
        std::cout << path << ": ok (experiment " << check.config.experiment << ")\n";
        return 0;
    }
    std::cout << path << ": " << check.violations.size() << " violation" << (check.violations.size() == 1 ? "" : "s")
              << '\n';
    for (const auto& v : check.violations) std::cout << "  " << v << '\n';
    return 2;
}

int run(const std::string& path, impactosc::RunOptions opts)
{
    impactosc::ExperimentConfig cfg;
    try {
        cfg = impactosc::load_config(impactosc::read_json_file(path));
    } catch (const impactosc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    opts.config_path = path;
    const auto res = impactosc::run_experiment(cfg, opts);
    for (const auto& n : res.notes) std::cout << n << '\n';
    std::cout << "wrote " << res.files.size() << " files to " << res.out_dir.string() << '\n';
    return res.checks_passed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Impact oscillator experiments"};
    app.require_subcommand(1);

    std::string out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
    app.add_option("--jobs", jobs, "Worker threads, 0 = all available")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for initial-condition sampling");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    run_cmd->add_option("config", config_path, "Config file")->required();
    auto* validate_cmd = app.add_subcommand("validate", "Check a config file without running it");
    validate_cmd->add_option("config", config_path, "Config file")->required();
    for (auto* sub : {run_cmd, validate_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*validate_cmd) return validate(config_path);
        impactosc::RunOptions opts;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        opts.jobs = jobs;
        if (*seed_opt) opts.seed = seed;
        return run(config_path, opts);
    } catch (const impactosc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
