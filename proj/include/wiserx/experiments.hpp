#pragma once

#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "wiserx/engine.hpp"
#include "wiserx/scenario.hpp"
#include "wiserx/world.hpp"

namespace wiserx {

/// The 40 x 40 cluttered office used by the canned experiments (10 m square
/// at 0.25 m). Identical to assets/office.txt.
inline constexpr const char* office_map_text =
    "########################################\n"
    "#............#............#............#\n"
    "#............#............#............#\n"
    "#............#.....#......#............#\n"
    "#..####......#.....#......#...######...#\n"
    "#..####......#.....#......#...######...#\n"
    "#..................#......#............#\n"
    "#..................#......#............#\n"
    "#..................#......#............#\n"
    "#............#............#.......####.#\n"
    "#......####..#............#...##.......#\n"
    "#......####..#..#######...#...##.......#\n"
    "#............#..#######...#...##.......#\n"
    "#............#............#...##.......#\n"
    "#............#............#............#\n"
    "#............#............#............#\n"
    "#####...###########...#########...######\n"
    "#......................................#\n"
    "#......................................#\n"
    "#...........###............##..........#\n"
    "#......................................#\n"
    "#......................................#\n"
    "########...####...#####...#####...######\n"
    "#...................#..................#\n"
    "#...................#..................#\n"
    "#...................#..................#\n"
    "#..#####.....##.....#...######.........#\n"
    "#..#####.....##.....#...######...#.....#\n"
    "#............##.....#............#.....#\n"
    "#............##.....#............#.....#\n"
    "#............##.....#............#.....#\n"
    "#............##.....#...####.....#.....#\n"
    "#...#####....##.....#...####.....#.....#\n"
    "#...#####....##..................#.....#\n"
    "#................................#.....#\n"
    "#......................................#\n"
    "#.........###.......#....#######.......#\n"
    "#.........###.......#....#######.......#\n"
    "#...................#..................#\n"
    "########################################\n";

inline std::shared_ptr<const GroundTruthMap> office_map() {
    static const auto map = std::make_shared<const GroundTruthMap>(load_environment(office_map_text));
    return map;
}

/// The canonical harness: office map, 3 robots at random free cells, default
/// noise with multipath outliers.
inline ScenarioConfig canonical_config() {
    ScenarioConfig cfg;
    cfg.map_source = "inline";
    cfg.map = office_map();
    cfg.robot_count = 3;
    cfg.start_mode = StartMode::Random;
    cfg.speed_factors.assign(3, 1.0);
    cfg.multipath_prob = 0.2;
    return cfg;
}

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"overlap", "termination", "slow", "failure", "noise"};
    return names;
}

inline const std::vector<NoiseLevel>& noise_sweep_levels() {
    constexpr double deg = std::numbers::pi / 180.0;
    static const std::vector<NoiseLevel> levels{{2.0 * deg, 0.01}, {5.0 * deg, 0.10}, {10.0 * deg, 0.20}, {30.0 * deg, 1.00}};
    return levels;
}

/// Configurations of one canned experiment; every configuration runs the same
/// seeds, so trial k is paired across them.
inline std::vector<ScenarioConfig> experiment_configs(const std::string& name) {
    const ScenarioConfig base = canonical_config();
    auto with = [&](Strategy s) {
        ScenarioConfig c = base;
        c.strategy = s;
        return c;
    };
    if (name == "overlap") return {with(Strategy::WiserX), with(Strategy::Baseline1), with(Strategy::Baseline2)};
    if (name == "termination") return {with(Strategy::WiserX), with(Strategy::Baseline1)};
    if (name == "slow") {
        std::vector<ScenarioConfig> out{with(Strategy::WiserX), with(Strategy::Baseline3)};
        for (auto& c : out) {
            c.start_mode = StartMode::Stratified;
            c.speed_factors = {1.0, 1.0, 0.5};
        }
        return out;
    }
    if (name == "failure") {
        ScenarioConfig gated = with(Strategy::WiserX);
        gated.failure = FailureSpec{};
        ScenarioConfig ungated = gated;
        ungated.tau_gating = false;
        return {gated, ungated};
    }
    if (name == "noise") {
        std::vector<ScenarioConfig> out;
        for (const auto& level : noise_sweep_levels()) {
            ScenarioConfig c = with(Strategy::WiserX);
            c.noise = level;
            c.multipath_prob = 0.0;
            out.push_back(c);
        }
        return out;
    }
    throw ConfigError("unknown experiment '" + name + "'");
}

inline constexpr std::uint64_t default_experiment_seed = 1000;
inline constexpr int default_experiment_trials = 20;

}  // namespace wiserx
