#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wiserx/common.hpp"
#include "wiserx/rng.hpp"
#include "wiserx/world.hpp"

namespace wiserx {

inline constexpr int scenario_schema_version = 1;

enum class Strategy { WiserX, Baseline1, Baseline2, Baseline3 };

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::WiserX: return "wiserx";
        case Strategy::Baseline1: return "baseline1";
        case Strategy::Baseline2: return "baseline2";
        case Strategy::Baseline3: return "baseline3";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& s) {
    if (s == "wiserx") return Strategy::WiserX;
    if (s == "baseline1") return Strategy::Baseline1;
    if (s == "baseline2") return Strategy::Baseline2;
    if (s == "baseline3") return Strategy::Baseline3;
    throw ConfigError("unknown strategy '" + s + "'");
}

/// How start poses are produced. Fixed uses start_poses verbatim; Random
/// draws free cells from the run seed; Stratified draws robot i inside the
/// i-th vertical strip of the map.
enum class StartMode { Fixed, Random, Stratified };

inline std::string to_string(StartMode m) {
    switch (m) {
        case StartMode::Fixed: return "fixed";
        case StartMode::Random: return "random";
        case StartMode::Stratified: return "stratified";
    }
    return "?";
}

struct NoiseLevel {
    double bearing_std = 5.0 * std::numbers::pi / 180.0;  // rad
    double range_std = 0.10;                               // m
    friend bool operator==(const NoiseLevel&, const NoiseLevel&) = default;
};

struct FailureSpec {
    std::optional<RobotId> robot_id;  // empty: drawn from the run seed
    double window_lo = 0.5;
    double window_hi = 0.7;
    friend bool operator==(const FailureSpec&, const FailureSpec&) = default;
};

struct ScenarioConfig {
    std::string map_source;
    std::shared_ptr<const GroundTruthMap> map;

    int robot_count = 1;
    StartMode start_mode = StartMode::Fixed;
    std::vector<Pose> start_poses;
    std::vector<double> speed_factors;

    double sensor_radius = 3.5;
    int lidar_beams = 360;
    NoiseLevel noise;
    double multipath_prob = 0.0;
    std::optional<FailureSpec> failure;
    Strategy strategy = Strategy::WiserX;
    double soft_threshold = 0.80;
    double hard_threshold = 0.95;
    int hgrid_fill_k = 3;
    std::uint64_t seed = 0;
    int max_ticks = 5000;
    double tick_dt = 0.5;

    double robot_speed = 0.12;      // m/s at speed factor 1
    int decision_interval = 10;     // ticks between ping rounds
    int ping_window = 10;           // samples per ping round
    int range_stride = 2;           // range sub-sampling stride
    double process_noise = 0.05;    // m^2/s^3
    int miss_limit = 3;             // missed ping rounds before deactivation
    bool tau_gating = true;         // false: ablation, failed peers never deactivated
    double kappa1 = 0.8 * 3.5;      // sigmoid midpoint (m)
    double kappa2 = 3.5 / 6.0;      // sigmoid steepness (m)
    double invalid_ratio = 0.90;
    double beta_floor = 0.01;
    double query_radius_mult = 2.0;
    double oracle_coverage = 0.95;  // merged-map termination for baselines 1 and 2
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace detail

/// Checks every scenario invariant and fills defaults. `base_dir` resolves a
/// relative "map" path.
inline ScenarioConfig validate_scenario(const nlohmann::json& raw, const std::filesystem::path& base_dir = {}) {
    using detail::get_or;
    if (!raw.is_object()) throw ConfigError("scenario must be a key-value object");

    static const char* known_keys[] = {
        "map", "map_text", "resolution", "robot_count", "start_mode", "start_poses", "speed_factors",
        "sensor_radius", "lidar_beams", "noise", "multipath_prob", "failure", "strategy", "soft_threshold",
        "hard_threshold", "hgrid_fill_k", "seed", "max_ticks", "tick_dt", "robot_speed", "decision_interval",
        "ping_window", "range_stride", "process_noise", "miss_limit", "tau_gating", "kappa1", "kappa2",
        "invalid_ratio", "beta_floor", "query_radius_mult", "oracle_coverage", "schema_version"};
    for (const auto& [key, value] : raw.items()) {
        if (std::find_if(std::begin(known_keys), std::end(known_keys), [&](const char* k) { return key == k; }) ==
            std::end(known_keys)) {
            throw ConfigError("unknown scenario key '" + key + "'");
        }
    }

    ScenarioConfig cfg;
    const double resolution = get_or(raw, "resolution", default_resolution);
    if (!(resolution > 0.0)) throw ConfigError("resolution must be positive");
    if (raw.contains("map_text")) {
        cfg.map_source = "inline";
        cfg.map = std::make_shared<const GroundTruthMap>(load_environment(raw.at("map_text").get<std::string>(), resolution));
    } else if (raw.contains("map")) {
        std::filesystem::path p = raw.at("map").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        cfg.map_source = raw.at("map").get<std::string>();
        cfg.map = std::make_shared<const GroundTruthMap>(load_environment_file(p.string(), resolution));
    } else {
        throw ConfigError("scenario needs 'map' or 'map_text'");
    }

    cfg.robot_count = get_or(raw, "robot_count", 1);
    if (cfg.robot_count < 1) throw ConfigError("robot_count must be >= 1");

    const std::string mode = get_or<std::string>(raw, "start_mode", raw.contains("start_poses") ? "fixed" : "random");
    if (mode == "fixed") cfg.start_mode = StartMode::Fixed;
    else if (mode == "random") cfg.start_mode = StartMode::Random;
    else if (mode == "stratified") cfg.start_mode = StartMode::Stratified;
    else throw ConfigError("unknown start_mode '" + mode + "'");

    if (raw.contains("start_poses")) {
        for (const auto& p : raw.at("start_poses")) {
            if (!p.is_array() || p.size() < 2 || p.size() > 3) throw ConfigError("start pose must be [x, y] or [x, y, heading]");
            Pose pose{p[0].get<double>(), p[1].get<double>(), p.size() == 3 ? p[2].get<double>() : 0.0};
            cfg.start_poses.push_back(pose);
        }
    }
    if (cfg.start_mode == StartMode::Fixed) {
        if (static_cast<int>(cfg.start_poses.size()) != cfg.robot_count) {
            throw InvalidStartPose("expected " + std::to_string(cfg.robot_count) + " start poses, got " +
                                   std::to_string(cfg.start_poses.size()));
        }
        for (std::size_t i = 0; i < cfg.start_poses.size(); ++i) {
            if (!cfg.map->free_at(cfg.start_poses[i].position())) {
                throw InvalidStartPose("start pose of robot " + std::to_string(i) + " is not on a free cell");
            }
        }
    }

    cfg.speed_factors = get_or(raw, "speed_factors", std::vector<double>(static_cast<std::size_t>(cfg.robot_count), 1.0));
    if (static_cast<int>(cfg.speed_factors.size()) != cfg.robot_count) throw ConfigError("speed_factors must have robot_count entries");
    for (double f : cfg.speed_factors) {
        if (!(f > 0.0)) throw ConfigError("speed factors must be positive");
    }

    cfg.sensor_radius = get_or(raw, "sensor_radius", 3.5);
    if (!(cfg.sensor_radius >= 0.0)) throw ConfigError("sensor_radius must be >= 0");
    cfg.lidar_beams = get_or(raw, "lidar_beams", 360);
    if (cfg.lidar_beams < 1) throw ConfigError("lidar_beams must be >= 1");

    if (raw.contains("noise")) {
        const auto& n = raw.at("noise");
        cfg.noise.bearing_std = get_or(n, "bearing_std", cfg.noise.bearing_std);
        cfg.noise.range_std = get_or(n, "range_std", cfg.noise.range_std);
    }
    if (cfg.noise.bearing_std < 0.0 || cfg.noise.range_std < 0.0) throw BadNoise("noise standard deviations must be >= 0");

    cfg.multipath_prob = get_or(raw, "multipath_prob", 0.0);
    if (cfg.multipath_prob < 0.0 || cfg.multipath_prob > 1.0) throw BadNoise("multipath_prob must lie in [0, 1]");

    if (raw.contains("failure") && !raw.at("failure").is_null()) {
        const auto& f = raw.at("failure");
        FailureSpec spec;
        if (f.contains("robot_id") && !f.at("robot_id").is_null()) spec.robot_id = f.at("robot_id").get<int>();
        if (f.contains("window")) {
            spec.window_lo = f.at("window").at(0).get<double>();
            spec.window_hi = f.at("window").at(1).get<double>();
        }
        if (spec.robot_id && (*spec.robot_id < 0 || *spec.robot_id >= cfg.robot_count)) throw ConfigError("failure robot_id out of range");
        if (!(0.0 <= spec.window_lo && spec.window_lo < spec.window_hi && spec.window_hi <= 1.0)) {
            throw ConfigError("failure window must satisfy 0 <= lo < hi <= 1");
        }
        cfg.failure = spec;
    }

    cfg.strategy = parse_strategy(get_or<std::string>(raw, "strategy", "wiserx"));
    cfg.soft_threshold = get_or(raw, "soft_threshold", 0.80);
    cfg.hard_threshold = get_or(raw, "hard_threshold", 0.95);
    if (!(0.0 < cfg.soft_threshold) || cfg.hard_threshold > 1.0) throw ThresholdOrder("thresholds must satisfy 0 < soft <= hard <= 1");
    if (cfg.soft_threshold > cfg.hard_threshold) {
        throw ThresholdOrder("soft_threshold " + std::to_string(cfg.soft_threshold) + " exceeds hard_threshold " +
                             std::to_string(cfg.hard_threshold));
    }

    cfg.hgrid_fill_k = get_or(raw, "hgrid_fill_k", 3);
    if (cfg.hgrid_fill_k < 1) throw ConfigError("hgrid_fill_k must be >= 1");
    cfg.seed = get_or<std::uint64_t>(raw, "seed", 0);
    cfg.max_ticks = get_or(raw, "max_ticks", 5000);
    if (cfg.max_ticks < 1) throw ConfigError("max_ticks must be >= 1");
    cfg.tick_dt = get_or(raw, "tick_dt", 0.5);
    if (!(cfg.tick_dt > 0.0)) throw ConfigError("tick_dt must be positive");

    cfg.robot_speed = get_or(raw, "robot_speed", 0.12);
    if (!(cfg.robot_speed > 0.0)) throw ConfigError("robot_speed must be positive");
    cfg.decision_interval = get_or(raw, "decision_interval", 10);
    cfg.ping_window = get_or(raw, "ping_window", 10);
    cfg.range_stride = get_or(raw, "range_stride", 2);
    cfg.miss_limit = get_or(raw, "miss_limit", 3);
    if (cfg.decision_interval < 1 || cfg.ping_window < 1 || cfg.range_stride < 1 || cfg.miss_limit < 1) {
        throw ConfigError("decision_interval, ping_window, range_stride and miss_limit must be >= 1");
    }
    cfg.process_noise = get_or(raw, "process_noise", 0.05);
    if (cfg.process_noise < 0.0) throw ConfigError("process_noise must be >= 0");
    cfg.tau_gating = get_or(raw, "tau_gating", true);
    cfg.kappa1 = get_or(raw, "kappa1", 0.8 * cfg.sensor_radius);
    cfg.kappa2 = get_or(raw, "kappa2", cfg.sensor_radius / 6.0);
    if (!(cfg.kappa2 > 0.0)) throw ConfigError("kappa2 must be positive");
    cfg.invalid_ratio = get_or(raw, "invalid_ratio", 0.90);
    if (!(cfg.invalid_ratio > 0.0 && cfg.invalid_ratio <= 1.0)) throw ConfigError("invalid_ratio must lie in (0, 1]");
    cfg.beta_floor = get_or(raw, "beta_floor", 0.01);
    if (!(cfg.beta_floor > 0.0)) throw ConfigError("beta_floor must be positive");
    cfg.query_radius_mult = get_or(raw, "query_radius_mult", 2.0);
    if (cfg.query_radius_mult < 0.0) throw ConfigError("query_radius_mult must be >= 0");
    cfg.oracle_coverage = get_or(raw, "oracle_coverage", 0.95);
    return cfg;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
    nlohmann::json raw;
    try {
        raw = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return validate_scenario(raw, std::filesystem::path(path).parent_path());
}

/// Resolved configuration as a document accepted by validate_scenario.
inline nlohmann::json to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = scenario_schema_version;
    if (cfg.map_source == "inline") {
        j["map_text"] = cfg.map->to_text();
    } else {
        j["map"] = cfg.map_source;
    }
    j["resolution"] = cfg.map->resolution();
    j["robot_count"] = cfg.robot_count;
    j["start_mode"] = to_string(cfg.start_mode);
    if (!cfg.start_poses.empty()) {
        auto poses = nlohmann::json::array();
        for (const auto& p : cfg.start_poses) poses.push_back({p.x, p.y, p.heading});
        j["start_poses"] = poses;
    }
    j["speed_factors"] = cfg.speed_factors;
    j["sensor_radius"] = cfg.sensor_radius;
    j["lidar_beams"] = cfg.lidar_beams;
    j["noise"] = {{"bearing_std", cfg.noise.bearing_std}, {"range_std", cfg.noise.range_std}};
    j["multipath_prob"] = cfg.multipath_prob;
    if (cfg.failure) {
        nlohmann::json f;
        f["robot_id"] = cfg.failure->robot_id ? nlohmann::json(*cfg.failure->robot_id) : nlohmann::json(nullptr);
        f["window"] = {cfg.failure->window_lo, cfg.failure->window_hi};
        j["failure"] = f;
    }
    j["strategy"] = to_string(cfg.strategy);
    j["soft_threshold"] = cfg.soft_threshold;
    j["hard_threshold"] = cfg.hard_threshold;
    j["hgrid_fill_k"] = cfg.hgrid_fill_k;
    j["seed"] = cfg.seed;
    j["max_ticks"] = cfg.max_ticks;
    j["tick_dt"] = cfg.tick_dt;
    j["robot_speed"] = cfg.robot_speed;
    j["decision_interval"] = cfg.decision_interval;
    j["ping_window"] = cfg.ping_window;
    j["range_stride"] = cfg.range_stride;
    j["process_noise"] = cfg.process_noise;
    j["miss_limit"] = cfg.miss_limit;
    j["tau_gating"] = cfg.tau_gating;
    j["kappa1"] = cfg.kappa1;
    j["kappa2"] = cfg.kappa2;
    j["invalid_ratio"] = cfg.invalid_ratio;
    j["beta_floor"] = cfg.beta_floor;
    j["query_radius_mult"] = cfg.query_radius_mult;
    j["oracle_coverage"] = cfg.oracle_coverage;
    return j;
}

/// Start poses for a run. Random and stratified modes draw cell centers from
/// the "starts" stream of `seed`, without repeating a cell.
inline std::vector<Pose> resolve_start_poses(const ScenarioConfig& cfg, std::uint64_t seed) {
    if (cfg.start_mode == StartMode::Fixed) return cfg.start_poses;

    const GroundTruthMap& map = *cfg.map;
    const GridGeometry geo = map.geometry();
    Rng rng = make_stream(seed, "starts");
    std::vector<Pose> poses;
    std::vector<Cell> taken;
    for (int i = 0; i < cfg.robot_count; ++i) {
        std::vector<Cell> candidates;
        const double strip_w = map.bounds().width() / cfg.robot_count;
        for (int r = 0; r < map.rows(); ++r) {
            for (int c = 0; c < map.cols(); ++c) {
                Cell cell{r, c};
                if (!map.free(cell)) continue;
                if (std::find(taken.begin(), taken.end(), cell) != taken.end()) continue;
                if (cfg.start_mode == StartMode::Stratified) {
                    const double x = geo.center(cell).x;
                    if (x < i * strip_w || x >= (i + 1) * strip_w) continue;
                }
                candidates.push_back(cell);
            }
        }
        if (candidates.empty()) throw InvalidStartPose("no free cell available for robot " + std::to_string(i));
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        const Cell cell = candidates[pick(rng)];
        taken.push_back(cell);
        const Vec2 p = geo.center(cell);
        poses.push_back({p.x, p.y, 0.0});
    }
    return poses;
}

}  // namespace wiserx
