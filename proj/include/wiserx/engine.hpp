#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wiserx/baselines.hpp"
#include "wiserx/common.hpp"
#include "wiserx/decision.hpp"
#include "wiserx/hgrid.hpp"
#include "wiserx/mapping.hpp"
#include "wiserx/metrics.hpp"
#include "wiserx/planner.hpp"
#include "wiserx/relpos.hpp"
#include "wiserx/rng.hpp"
#include "wiserx/scenario.hpp"
#include "wiserx/sensing.hpp"
#include "wiserx/world.hpp"

namespace wiserx {

enum class AgentState { Exploring, Terminated, Failed };
enum class EventKind { Terminate, Fail, GoalChange };

inline std::string to_string(AgentState s) {
    switch (s) {
        case AgentState::Exploring: return "exploring";
        case AgentState::Terminated: return "terminated";
        case AgentState::Failed: return "failed";
    }
    return "?";
}

inline std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::Terminate: return "terminate";
        case EventKind::Fail: return "fail";
        case EventKind::GoalChange: return "goal_change";
    }
    return "?";
}

struct Event {
    Tick tick = 0;
    RobotId robot = 0;
    EventKind kind = EventKind::GoalChange;
    Cell goal{-1, -1};  // GoalChange only
    friend bool operator==(const Event&, const Event&) = default;
};

/// One scored frontier at one decision.
struct DecisionRecord {
    Tick tick = 0;
    RobotId robot = 0;
    int frontier_id = 0;
    double utility = 0.0;
    double gain = 0.0;
    double loss = 0.0;
    bool valid = false;
    bool chosen = false;
    friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

struct TickRecord {
    Tick tick = 0;
    double merged_coverage = 0.0;       // %, non-failed robots
    double overlap = 0.0;               // %, non-failed robots
    std::vector<double> robot_coverage;  // %, each robot's own map
    friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct RunResult {
    nlohmann::json config;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::WiserX;
    NoiseLevel noise;
    std::vector<Pose> start_poses;

    std::vector<TickRecord> series;
    std::vector<Event> events;
    std::vector<DecisionRecord> decisions;  // filled only when tracing
    std::vector<LocalMap> final_maps;
    std::vector<AgentState> final_states;
    std::vector<Tick> termination_ticks;  // -1: never terminated
    bool tick_budget_exceeded = false;

    std::optional<RobotId> failed_robot;
    Tick fail_tick = -1;
    LocalMap survivors_at_failure;  // merged map of the other robots at the fail tick

    double final_coverage = 0.0;  // %, merged over non-failed robots
    double final_overlap = 0.0;   // %, non-failed robots
    double recovered = 0.0;       // %, see recovered_percent
    double exclusive = 0.0;       // %, see exclusive_percent

    [[nodiscard]] Tick ticks() const { return static_cast<Tick>(series.size()); }

    /// Latest termination tick among robots that did not fail; the tick count
    /// when some robot never terminated.
    [[nodiscard]] Tick term_tick_max() const {
        Tick out = 0;
        for (std::size_t i = 0; i < final_states.size(); ++i) {
            if (final_states[i] == AgentState::Failed) continue;
            out = std::max(out, termination_ticks[i] < 0 ? ticks() : termination_ticks[i]);
        }
        return out;
    }

    /// First tick whose merged coverage reached `pct`.
    [[nodiscard]] std::optional<Tick> first_tick_at(double pct) const {
        for (const auto& r : series) {
            if (r.merged_coverage >= pct) return r.tick;
        }
        return std::nullopt;
    }

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct RunOptions {
    bool trace_decisions = false;
};

/// One robot: its own map, hgrid and neighbour tracks, plus the motion state.
struct RobotAgent {
    RobotId id = 0;
    Pose pose;
    LocalMap map;
    Hgrid hgrid;
    std::vector<std::optional<RelPosTrack>> tracks;
    std::vector<int> missed;
    AgentState state = AgentState::Exploring;
    double speed_factor = 1.0;

    std::optional<Cell> goal;
    Trajectory trajectory;
    bool reevaluated = false;
    std::set<Cell> blacklist;
    Tick terminated_at = -1;

    RobotAgent(RobotId id_, Pose pose_, const GridGeometry& geo, Rect bounds, double cell_size, int n)
        : id(id_), pose(pose_), map(geo), hgrid(bounds, cell_size, id_), tracks(static_cast<std::size_t>(n)),
          missed(static_cast<std::size_t>(n), 0) {}
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

/// Deterministic simulation of one scenario. Call step() until done(), or
/// run() for the whole loop.
class Simulation {
public:
    explicit Simulation(const ScenarioConfig& cfg, RunOptions options = {})
        : cfg_(cfg), truth_(*cfg.map), options_(options), params_(make_params(cfg)) {
        const auto poses = resolve_start_poses(cfg, cfg.seed);
        if (static_cast<int>(poses.size()) != cfg.robot_count) throw InvalidStartPose("start pose count differs from robot_count");
        const GridGeometry geo = truth_.geometry();
        for (int i = 0; i < cfg.robot_count; ++i) {
            const Pose p = poses[static_cast<std::size_t>(i)];
            if (!truth_.free_at(p.position())) throw InvalidStartPose("start pose of robot " + std::to_string(i) + " is not free");
            agents_.emplace_back(i, p, geo, truth_.bounds(), cfg.sensor_radius, cfg.robot_count);
            agents_.back().speed_factor = cfg.speed_factors.empty() ? 1.0 : cfg.speed_factors[static_cast<std::size_t>(i)];
            for (int j = 0; j < cfg.robot_count; ++j) {
                ping_rngs_.push_back(make_stream(cfg.seed, "ping", static_cast<std::uint64_t>(i * cfg.robot_count + j)));
            }
        }
        if (cfg.strategy == Strategy::Baseline3) partition_ = baseline3_partition(truth_.bounds(), cfg.robot_count);
        if (cfg.failure) {
            if (cfg.failure->robot_id) {
                failure_target_ = *cfg.failure->robot_id;
            } else {
                Rng rng = make_stream(cfg.seed, "failure");
                failure_target_ = std::uniform_int_distribution<int>(0, cfg.robot_count - 1)(rng);
            }
        }

        result_.config = to_json(cfg);
        result_.seed = cfg.seed;
        result_.strategy = cfg.strategy;
        result_.noise = cfg.noise;
        result_.start_poses = poses;
    }

    [[nodiscard]] bool done() const { return finished_; }
    [[nodiscard]] Tick tick() const { return tick_; }
    [[nodiscard]] const std::vector<RobotAgent>& agents() const { return agents_; }
    [[nodiscard]] const RunResult& partial_result() const { return result_; }

    /// Fails an exploring robot; a terminated or failed robot is left alone.
    void inject_failure(RobotId id) {
        RobotAgent& a = agents_.at(static_cast<std::size_t>(id));
        if (a.state != AgentState::Exploring) return;
        a.state = AgentState::Failed;
        a.goal.reset();
        result_.events.push_back({tick_, id, EventKind::Fail, {-1, -1}});
        result_.failed_robot = id;
        result_.fail_tick = tick_;
        result_.survivors_at_failure = merged_map();
    }

    void step() {
        if (finished_) return;
        perceive();
        maybe_fail();
        if (cfg_.strategy == Strategy::WiserX && tick_ % cfg_.decision_interval == 0) ping_round();
        if ((cfg_.strategy == Strategy::Baseline1 || cfg_.strategy == Strategy::Baseline2) &&
            coverage_percent(merged_map(), truth_) >= 100.0 * cfg_.oracle_coverage) {
            for (auto& a : agents_) {
                if (a.state == AgentState::Exploring) terminate(a);
            }
        }
        if (cfg_.strategy == Strategy::Baseline2) {
            decide_baseline2();
        } else {
            for (auto& a : agents_) {
                if (a.state == AgentState::Exploring) decide(a);
            }
        }
        for (auto& a : agents_) {
            if (a.state == AgentState::Exploring && a.goal) {
                a.pose = step_motion(a.pose, a.trajectory, cfg_.robot_speed * a.speed_factor, cfg_.tick_dt).pose;
            }
        }
        record();
        ++tick_;
        const bool any_exploring =
            std::any_of(agents_.begin(), agents_.end(), [](const RobotAgent& a) { return a.state == AgentState::Exploring; });
        if (!any_exploring) {
            finished_ = true;
        } else if (tick_ >= cfg_.max_ticks) {
            finished_ = true;
            result_.tick_budget_exceeded = true;
        }
    }

    RunResult run() {
        while (!finished_) step();
        return finish();
    }

    /// Final bookkeeping; call once after the loop.
    RunResult finish() {
        for (const auto& a : agents_) {
            result_.final_maps.push_back(a.map);
            result_.final_states.push_back(a.state);
            result_.termination_ticks.push_back(a.terminated_at);
        }
        const LocalMap merged = merged_map();
        result_.final_coverage = coverage_percent(merged, truth_);
        result_.final_overlap = overlap_now();
        if (result_.failed_robot) {
            const LocalMap& failed = agents_[static_cast<std::size_t>(*result_.failed_robot)].map;
            result_.recovered = recovered_percent(failed, result_.survivors_at_failure, merged, truth_);
            result_.exclusive = exclusive_percent(failed, result_.survivors_at_failure, truth_);
        }
        return result_;
    }

private:
    static UtilityParams make_params(const ScenarioConfig& cfg) {
        UtilityParams p;
        p.r = cfg.sensor_radius;
        p.kappa1 = cfg.kappa1;
        p.kappa2 = cfg.kappa2;
        p.invalid_ratio = cfg.invalid_ratio;
        p.beta_floor = cfg.beta_floor;
        p.query_radius_mult = cfg.query_radius_mult;
        return p;
    }

    [[nodiscard]] std::vector<const LocalMap*> live_maps() const {
        std::vector<const LocalMap*> maps;
        for (const auto& a : agents_) {
            if (a.state != AgentState::Failed) maps.push_back(&a.map);
        }
        return maps;
    }

    [[nodiscard]] LocalMap merged_map() const {
        const auto maps = live_maps();
        if (maps.empty()) return LocalMap(truth_.geometry());
        return merge_maps(maps);
    }

    [[nodiscard]] double overlap_now() const { return pairwise_overlap(live_maps(), truth_); }

    void perceive() {
        for (auto& a : agents_) {
            if (a.state != AgentState::Exploring) continue;
            integrate_scan(a.map, a.pose, lidar_scan(a.pose, truth_, cfg_.sensor_radius, cfg_.lidar_beams));
        }
    }

    void maybe_fail() {
        if (!cfg_.failure || failure_fired_) return;
        const double cov = coverage_percent(merged_map(), truth_) / 100.0;
        if (cov >= cfg_.failure->window_lo && cov <= cfg_.failure->window_hi) {
            failure_fired_ = true;
            inject_failure(failure_target_);
        }
    }

    /// Every exploring robot pings each peer, filters the fused measurement,
    /// and records the estimate and its own position in its hgrid. A peer
    /// that stays silent for miss_limit rounds is deactivated.
    void ping_round() {
        const int n = cfg_.robot_count;
        const PingNoise noise{cfg_.noise.bearing_std, cfg_.noise.range_std};
        constexpr double var_floor = 1e-4;
        const MeasurementNoise meas_noise{std::max(var_floor, cfg_.noise.range_std * cfg_.noise.range_std),
                                          std::max(var_floor, cfg_.noise.bearing_std * cfg_.noise.bearing_std)};
        for (auto& a : agents_) {
            if (a.state != AgentState::Exploring) continue;
            for (int j = 0; j < n; ++j) {
                if (j == a.id) continue;
                const auto sj = static_cast<std::size_t>(j);
                auto& track = a.tracks[sj];
                if (agents_[sj].state == AgentState::Failed) {
                    if (++a.missed[sj] >= cfg_.miss_limit && track && track->tau == 1 && cfg_.tau_gating) {
                        deactivate(*track);
                        a.hgrid.set_active(j, false);
                    }
                    continue;
                }
                Rng& rng = ping_rngs_[static_cast<std::size_t>(a.id * n + j)];
                const PingSampleSet set =
                    ping_measurement(a.pose, agents_[sj].pose, noise, cfg_.multipath_prob, cfg_.ping_window, rng);
                const RangeBearing meas{average_range(set.range_samples, cfg_.range_stride),
                                        select_stable_bearing(set.bearing_samples)};
                if (!track) {
                    track = init_track(j, meas, a.pose, meas_noise, tick_);
                } else {
                    ekf_predict(*track, static_cast<double>(tick_ - track->last_update_tick) * cfg_.tick_dt, cfg_.process_noise);
                    ekf_update(*track, meas, a.pose, meas_noise, tick_);
                }
                a.missed[sj] = 0;
                a.hgrid.insert(j, track->position(), track->trace_pos, tick_);
            }
            a.hgrid.insert(a.id, a.pose.position(), 0.0, tick_);
        }
    }

    void terminate(RobotAgent& a) {
        a.state = AgentState::Terminated;
        a.terminated_at = tick_;
        a.goal.reset();
        result_.events.push_back({tick_, a.id, EventKind::Terminate, {-1, -1}});
    }

    /// Whether the robot must pick a (new) goal this tick. Reaching a goal
    /// that is still a frontier blacklists it.
    bool needs_decision(RobotAgent& a, const LocalMap& map) {
        if (!a.goal) return true;
        const bool still_frontier = is_frontier_cell(map, *a.goal);
        if (a.trajectory.finished()) {
            if (still_frontier) a.blacklist.insert(*a.goal);
            return true;
        }
        if (!still_frontier) return true;
        return !a.reevaluated && commitment_check(a.trajectory.progress(), still_frontier);
    }

    /// Frontiers of `map` reachable from the robot, without blacklisted cells.
    std::vector<Frontier> candidate_frontiers(const RobotAgent& a, const LocalMap& map, Grid<double>* dist_out = nullptr) const {
        const GridGeometry& geo = map.geometry();
        const Grid<double> dist = distance_field(map, geo.cell_of(a.pose.position()));
        std::vector<Frontier> out;
        for (auto& f : extract_frontiers(map, cfg_.sensor_radius)) {
            if (!std::isfinite(dist[f.center])) continue;
            const bool banned = std::any_of(f.cells.begin(), f.cells.end(), [&](Cell c) { return a.blacklist.count(c) > 0; });
            if (!banned) out.push_back(std::move(f));
        }
        if (dist_out) *dist_out = dist;
        return out;
    }

    /// Plans to `goal` on `map`; a goal equal to the current one keeps the
    /// running trajectory. Returns false if no path exists.
    bool set_goal(RobotAgent& a, Cell goal, const LocalMap& map) {
        const bool same = a.goal && *a.goal == goal && !a.trajectory.finished();
        if (same) {
            a.reevaluated = true;
            return true;
        }
        const auto path = shortest_path(map, map.geometry().cell_of(a.pose.position()), goal);
        if (!path) {
            a.blacklist.insert(goal);
            return false;
        }
        a.goal = goal;
        a.trajectory = Trajectory(a.pose.position(), *path, map.geometry());
        a.reevaluated = false;
        result_.events.push_back({tick_, a.id, EventKind::GoalChange, goal});
        return true;
    }

    static Cell goal_cell(const Frontier& f, const FrontierScore& s, const Grid<double>& dist) {
        return std::isfinite(dist[s.best_viewpoint]) ? s.best_viewpoint : f.center;
    }

    /// Evaluation oracle for Baseline 3: the fraction of ground-truth free
    /// cells in the robot's strip that its own map knows.
    [[nodiscard]] double strip_coverage(const RobotAgent& a) const {
        const Rect& region = partition_.regions[static_cast<std::size_t>(a.id)];
        const GridGeometry geo = truth_.geometry();
        std::size_t free = 0;
        std::size_t known = 0;
        for (int r = 0; r < geo.rows; ++r) {
            for (int c = 0; c < geo.cols; ++c) {
                const Cell cell{r, c};
                if (!truth_.free(cell) || !in_region(region, geo.center(cell), truth_.bounds())) continue;
                ++free;
                if (a.map.at(cell) != CellState::Unknown) ++known;
            }
        }
        return free == 0 ? 1.0 : static_cast<double>(known) / static_cast<double>(free);
    }

    /// Baseline 3 goals stay inside the robot's strip: the best viewpoint if
    /// it qualifies, else the frontier center (whose membership was checked).
    Cell strip_goal(const RobotAgent& a, const Frontier& f, const FrontierScore& s, const Grid<double>& dist,
                    const LocalMap& map) const {
        const Rect& region = partition_.regions[static_cast<std::size_t>(a.id)];
        if (std::isfinite(dist[s.best_viewpoint]) && in_region(region, map.geometry().center(s.best_viewpoint), truth_.bounds())) {
            return s.best_viewpoint;
        }
        return f.center;
    }

    void trace(const RobotAgent& a, const std::vector<FrontierScore>& scores, std::optional<int> chosen) {
        if (!options_.trace_decisions) return;
        for (const auto& s : scores) {
            result_.decisions.push_back(
                {tick_, a.id, s.frontier_id, s.utility, s.gain, s.loss_total, s.valid, chosen && *chosen == s.frontier_id});
        }
    }

    void decide(RobotAgent& a) {
        double coverage = 0.0;
        if (cfg_.strategy == Strategy::WiserX) {
            coverage = a.hgrid.coverage_fraction(cfg_.hgrid_fill_k);
            if (coverage >= cfg_.hard_threshold) {
                terminate(a);
                return;
            }
        }
        const LocalMap& map = a.map;
        if (cfg_.strategy == Strategy::Baseline3 && strip_coverage(a) >= cfg_.oracle_coverage) {
            terminate(a);
            return;
        }
        if (!needs_decision(a, map)) return;

        // A goal that cannot be planned to is blacklisted; try again.
        for (int attempt = 0; attempt < 8; ++attempt) {
            Grid<double> dist;
            auto frontiers = candidate_frontiers(a, map, &dist);
            std::vector<FrontierScore> scores;
            std::optional<int> chosen;
            switch (cfg_.strategy) {
                case Strategy::WiserX: {
                    scores.reserve(frontiers.size());
                    for (const auto& f : frontiers) scores.push_back(score_frontier(f, a.pose, a.map, a.hgrid, params_));
                    if (should_terminate(scores, coverage, cfg_.soft_threshold, cfg_.hard_threshold) == TerminationDecision::Terminate) {
                        trace(a, scores, std::nullopt);
                        terminate(a);
                        return;
                    }
                    chosen = select_frontier(scores, coverage >= cfg_.soft_threshold);
                    break;
                }
                case Strategy::Baseline1:
                case Strategy::Baseline3: {
                    if (cfg_.strategy == Strategy::Baseline3) {
                        const Rect& region = partition_.regions[static_cast<std::size_t>(a.id)];
                        frontiers = clip_to_region(frontiers, map.geometry(), region, truth_.bounds());
                        std::erase_if(frontiers, [&](const Frontier& f) { return !std::isfinite(dist[f.center]); });
                    }
                    scores = score_independent(frontiers, map, a.pose.position(), params_);
                    chosen = select_frontier(scores, false);
                    break;
                }
                case Strategy::Baseline2: break;
            }
            trace(a, scores, chosen);
            if (!chosen) {
                // Baseline 1 keeps its merged-map oracle as the only stop rule
                // while frontiers exist; with none left, the robot is done.
                terminate(a);
                return;
            }
            const auto it = std::find_if(frontiers.begin(), frontiers.end(), [&](const Frontier& f) { return f.id == *chosen; });
            const auto sit = std::find_if(scores.begin(), scores.end(), [&](const FrontierScore& s) { return s.frontier_id == *chosen; });
            Cell goal = goal_cell(*it, *sit, dist);
            if (cfg_.strategy == Strategy::Baseline3) goal = strip_goal(a, *it, *sit, dist, map);
            if (set_goal(a, goal, map)) return;
        }
        a.goal.reset();
    }

    /// Central assigner over the merged map for every robot that needs a goal.
    void decide_baseline2() {
        const LocalMap merged = merged_map();
        std::map<RobotId, Pose> pending;
        for (auto& a : agents_) {
            if (a.state == AgentState::Exploring && needs_decision(a, merged)) pending[a.id] = a.pose;
        }
        if (pending.empty()) return;

        auto frontiers = extract_frontiers(merged, cfg_.sensor_radius);
        if (frontiers.empty()) {
            for (auto& a : agents_) {
                if (a.state == AgentState::Exploring) terminate(a);
            }
            return;
        }
        // Frontiers already targeted by committed robots are not reassigned.
        std::erase_if(frontiers, [&](const Frontier& f) {
            for (const auto& a : agents_) {
                if (a.state != AgentState::Exploring || pending.count(a.id) || !a.goal) continue;
                if (std::find(f.cells.begin(), f.cells.end(), *a.goal) != f.cells.end()) return true;
            }
            return false;
        });
        std::map<RobotId, Grid<double>> dists;
        for (const auto& [id, pose] : pending) dists[id] = distance_field(merged, merged.geometry().cell_of(pose.position()));
        const auto reachable = [&](RobotId id, const Frontier& f) {
            const auto& a = agents_[static_cast<std::size_t>(id)];
            if (std::any_of(f.cells.begin(), f.cells.end(), [&](Cell c) { return a.blacklist.count(c) > 0; })) return false;
            return std::isfinite(dists.at(id)[f.center]);
        };
        const auto assignment = baseline2_assign(merged, pending, frontiers, params_, reachable);
        for (const auto& [id, pose] : pending) {
            auto& a = agents_[static_cast<std::size_t>(id)];
            const auto it = assignment.find(id);
            if (it == assignment.end()) {
                a.goal.reset();  // idle until a frontier frees up
                continue;
            }
            const auto fit = std::find_if(frontiers.begin(), frontiers.end(), [&](const Frontier& f) { return f.id == it->second; });
            // The assigner ranks by the best viewpoint's gain; head there.
            Cell goal = fit->center;
            double best = -1.0;
            for (Cell vp : fit->viewpoints) {
                const double g = information_gain(vp, merged, {}, params_).gain_raw;
                if (g > best && std::isfinite(dists.at(id)[vp])) {
                    best = g;
                    goal = vp;
                }
            }
            if (!set_goal(a, goal, merged)) a.goal.reset();
        }
    }

    void record() {
        TickRecord r;
        r.tick = tick_;
        r.merged_coverage = coverage_percent(merged_map(), truth_);
        r.overlap = overlap_now();
        for (const auto& a : agents_) r.robot_coverage.push_back(coverage_percent(a.map, truth_));
        result_.series.push_back(std::move(r));
    }

    ScenarioConfig cfg_;
    const GroundTruthMap& truth_;
    RunOptions options_;
    UtilityParams params_;
    std::vector<RobotAgent> agents_;
    std::vector<Rng> ping_rngs_;
    Partition partition_;
    RobotId failure_target_ = 0;
    bool failure_fired_ = false;
    Tick tick_ = 0;
    bool finished_ = false;
    RunResult result_;
};

inline RunResult run(const ScenarioConfig& cfg, RunOptions options = {}) { return Simulation(cfg, options).run(); }

/// A run failure inside a batch, tagged with its position.
class BatchError : public Error {
public:
    BatchError(std::size_t config_index, int trial, const std::string& what)
        : Error("config " + std::to_string(config_index) + " trial " + std::to_string(trial) + ": " + what),
          config_index_(config_index), trial_(trial) {}
    [[nodiscard]] std::size_t config_index() const { return config_index_; }
    [[nodiscard]] int trial() const { return trial_; }

private:
    std::size_t config_index_;
    int trial_;
};

/// Runs every config for `trials` trials; trial k uses seed base_seed + k.
/// Results are ordered by (config, trial) whatever the thread count.
inline std::vector<RunResult> batch(const std::vector<ScenarioConfig>& configs, int trials, std::uint64_t base_seed,
                                    unsigned threads = 1) {
    if (trials < 1) throw Error("batch needs trials >= 1");
    const std::size_t total = configs.size() * static_cast<std::size_t>(trials);
    std::vector<RunResult> results(total);
    std::vector<std::exception_ptr> errors(total);
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            std::size_t job = 0;
            {
                std::lock_guard lock(mu);
                if (next >= total) return;
                job = next++;
            }
            const std::size_t ci = job / static_cast<std::size_t>(trials);
            const int k = static_cast<int>(job % static_cast<std::size_t>(trials));
            try {
                ScenarioConfig cfg = configs[ci];
                cfg.seed = base_seed + static_cast<std::uint64_t>(k);
                results[job] = run(cfg);
            } catch (...) {
                errors[job] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(total)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t job = 0; job < total; ++job) {
        if (!errors[job]) continue;
        const std::size_t ci = job / static_cast<std::size_t>(trials);
        const int k = static_cast<int>(job % static_cast<std::size_t>(trials));
        try {
            std::rethrow_exception(errors[job]);
        } catch (const std::exception& e) {
            throw BatchError(ci, k, e.what());
        }
    }
    return results;
}

/// The run as named text files: config.json, summary.json, ticks.csv,
/// events.csv, decisions.csv (when traced) and maps/robot_<k>.txt.
inline std::map<std::string, std::string> serialize(const RunResult& r) {
    using detail::fmt;
    std::map<std::string, std::string> files;
    files["config.json"] = r.config.dump(2) + "\n";

    nlohmann::json s;
    s["format_version"] = 1;
    s["seed"] = r.seed;
    s["strategy"] = to_string(r.strategy);
    s["ticks"] = r.ticks();
    s["tick_budget_exceeded"] = r.tick_budget_exceeded;
    s["term_tick_max"] = r.term_tick_max();
    s["termination_ticks"] = r.termination_ticks;
    auto states = nlohmann::json::array();
    for (auto st : r.final_states) states.push_back(to_string(st));
    s["final_states"] = states;
    auto starts = nlohmann::json::array();
    for (const auto& p : r.start_poses) starts.push_back({p.x, p.y, p.heading});
    s["start_poses"] = starts;
    s["coverage_pct"] = fmt(r.final_coverage);
    s["overlap_pct"] = fmt(r.final_overlap);
    s["recovered_pct"] = fmt(r.recovered);
    s["exclusive_pct"] = fmt(r.exclusive);
    s["failed_robot"] = r.failed_robot ? nlohmann::json(*r.failed_robot) : nlohmann::json(nullptr);
    s["fail_tick"] = r.fail_tick;
    files["summary.json"] = s.dump(2) + "\n";

    std::string ticks = "tick,merged_coverage_pct,overlap_pct";
    for (std::size_t i = 0; i < r.final_maps.size(); ++i) ticks += ",robot" + std::to_string(i) + "_coverage_pct";
    ticks += "\n";
    for (const auto& t : r.series) {
        ticks += std::to_string(t.tick) + "," + fmt(t.merged_coverage) + "," + fmt(t.overlap);
        for (double c : t.robot_coverage) ticks += "," + fmt(c);
        ticks += "\n";
    }
    files["ticks.csv"] = ticks;

    std::string events = "tick,robot,kind,goal_row,goal_col\n";
    for (const auto& e : r.events) {
        events += std::to_string(e.tick) + "," + std::to_string(e.robot) + "," + to_string(e.kind) + "," +
                  std::to_string(e.goal.row) + "," + std::to_string(e.goal.col) + "\n";
    }
    files["events.csv"] = events;

    if (!r.decisions.empty()) {
        std::string d = "tick,robot,frontier_id,utility,gain,loss,valid,chosen\n";
        for (const auto& x : r.decisions) {
            d += std::to_string(x.tick) + "," + std::to_string(x.robot) + "," + std::to_string(x.frontier_id) + "," +
                 fmt(x.utility) + "," + fmt(x.gain) + "," + fmt(x.loss) + "," + (x.valid ? "1" : "0") + "," +
                 (x.chosen ? "1" : "0") + "\n";
        }
        files["decisions.csv"] = d;
    }
    for (std::size_t i = 0; i < r.final_maps.size(); ++i) files["maps/robot_" + std::to_string(i) + ".txt"] = r.final_maps[i].to_text();
    return files;
}

}  // namespace wiserx
