#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wiserx/wiserx.hpp"

namespace fs = std::filesystem;
using namespace wiserx;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

std::string default_out_dir() {
    const char* env = std::getenv("WISERX_OUT");
    return env && *env ? env : "wiserx-out";
}

void write_files(const fs::path& dir, const std::map<std::string, std::string>& files) {
    for (const auto& [name, text] : files) {
        const fs::path p = dir / name;
        fs::create_directories(p.parent_path());
        write_text(p.string(), text);
    }
}

void write_summary(const fs::path& dir, const std::vector<RunResult>& results) {
    fs::create_directories(dir);
    const Summary s = summarize(results);
    write_csv(s.trials, (dir / "trials.csv").string());
    write_text((dir / "aggregates.csv").string(), aggregates_csv(s.aggregates));
    write_text((dir / "series.csv").string(), series_csv(results, s.trials));
    for (const auto& a : s.aggregates) {
        std::printf("%s noise=(%s deg, %s cm) n=%d coverage=%s+-%s term=%s overlap=%s recovered=%s\n", a.label.c_str(),
                    format6(a.noise_bearing_deg).c_str(), format6(a.noise_range_cm).c_str(), a.n, format6(a.coverage_pct.mean).c_str(),
                    format6(a.coverage_pct.std).c_str(), format6(a.term_tick_max.mean).c_str(), format6(a.overlap_pct.mean).c_str(),
                    format6(a.recovered_pct.mean).c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-robot frontier exploration with estimated inter-robot range and bearing"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", std::to_string(scenario_schema_version), "Print the scenario schema version");

    std::string scenario;
    std::string out_dir = default_out_dir();
    std::uint64_t seed = 0;
    int trials = default_experiment_trials;
    unsigned threads = std::max(1U, std::thread::hardware_concurrency());
    bool trace = false;

    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its result bundle");
    run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
    auto* run_seed = run_cmd->add_option("--seed", seed, "Override the scenario seed");
    run_cmd->add_option("--out", out_dir, "Output directory (default $WISERX_OUT or ./wiserx-out)");
    run_cmd->add_flag("--trace", trace, "Also write every scored frontier to decisions.csv");

    auto* batch_cmd = app.add_subcommand("batch", "Run a scenario over seeded trials and write summary CSVs");
    batch_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
    batch_cmd->add_option("--trials", trials, "Number of trials")->required()->check(CLI::PositiveNumber);
    auto* batch_seed = batch_cmd->add_option("--seed", seed, "Base seed; trial k uses base + k (default: the scenario seed)");
    batch_cmd->add_option("--out", out_dir, "Output directory");
    batch_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string experiment;
    seed = default_experiment_seed;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a canned experiment and write summary CSVs");
    exp_cmd->add_option("name", experiment, "Experiment name")->required()->check(CLI::IsMember(experiment_names()));
    exp_cmd->add_option("--out", out_dir, "Output directory");
    exp_cmd->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    exp_cmd->add_option("--seed", seed, "Base seed");
    exp_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and print it with defaults resolved");
    validate_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return exit_usage;
    }

    try {
        if (*validate_cmd) {
            const ScenarioConfig cfg = load_scenario_file(scenario);
            std::cout << to_json(cfg).dump(2) << "\n";
        } else if (*run_cmd) {
            ScenarioConfig cfg = load_scenario_file(scenario);
            if (*run_seed) cfg.seed = seed;
            const RunResult r = run(cfg, {trace});
            write_files(out_dir, serialize(r));
            std::printf("seed=%llu ticks=%lld coverage=%s overlap=%s term_tick_max=%lld%s\n",
                        static_cast<unsigned long long>(r.seed), static_cast<long long>(r.ticks()),
                        format6(r.final_coverage).c_str(), format6(r.final_overlap).c_str(),
                        static_cast<long long>(r.term_tick_max()), r.tick_budget_exceeded ? " (tick budget exceeded)" : "");
        } else if (*batch_cmd) {
            const ScenarioConfig cfg = load_scenario_file(scenario);
            const std::uint64_t base = *batch_seed ? seed : cfg.seed;
            write_summary(out_dir, batch({cfg}, trials, base, threads));
        } else if (*exp_cmd) {
            write_summary(out_dir, batch(experiment_configs(experiment), trials, seed, threads));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_ok;
}
