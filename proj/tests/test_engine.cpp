#include <gtest/gtest.h>

#include <set>

#include "wiserx/wiserx.hpp"

using namespace wiserx;

namespace {

ScenarioConfig room(int size) {
    std::string text;
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) text += r == 0 || c == 0 || r == size - 1 || c == size - 1 ? '#' : '.';
        text += '\n';
    }
    ScenarioConfig cfg;
    cfg.map_source = "inline";
    cfg.map = std::make_shared<const GroundTruthMap>(load_environment(text));
    cfg.robot_count = 1;
    cfg.start_poses = {{size * 0.125, size * 0.125, 0.0}};
    return cfg;
}

ScenarioConfig office(Strategy s, std::uint64_t seed) {
    ScenarioConfig cfg = canonical_config();
    cfg.strategy = s;
    cfg.seed = seed;
    return cfg;
}

double merged_all(const Simulation& sim, const GroundTruthMap& truth) {
    std::vector<const LocalMap*> maps;
    for (const auto& a : sim.agents()) maps.push_back(&a.map);
    return coverage_percent(merge_maps(maps), truth);
}

}  // namespace

TEST(Engine, SameSeedSameResult) {
    for (Strategy s : {Strategy::WiserX, Strategy::Baseline2, Strategy::Baseline3}) {
        const RunResult a = run(office(s, 3));
        const RunResult b = run(office(s, 3));
        EXPECT_TRUE(a == b) << to_string(s);
        EXPECT_EQ(serialize(a), serialize(b));
    }
    EXPECT_FALSE(run(office(Strategy::WiserX, 3)) == run(office(Strategy::WiserX, 4)));
}

TEST(Engine, SingleRobotCoversASmallRoom) {
    const RunResult r = run(room(9));
    EXPECT_DOUBLE_EQ(r.final_coverage, 100.0);
    ASSERT_EQ(r.final_states.size(), 1u);
    EXPECT_EQ(r.final_states[0], AgentState::Terminated);
    EXPECT_FALSE(r.tick_budget_exceeded);
    EXPECT_EQ(r.final_overlap, 0.0);
}

TEST(Engine, FixedStartPoseMustBeFree) {
    ScenarioConfig cfg = room(9);
    cfg.start_poses = {{0.1, 0.1, 0.0}};
    EXPECT_THROW(Simulation{cfg}, InvalidStartPose);
}

TEST(Engine, TickBudgetStopsTheRun) {
    ScenarioConfig cfg = office(Strategy::WiserX, 1);
    cfg.max_ticks = 20;
    const RunResult r = run(cfg);
    EXPECT_EQ(r.ticks(), 20);
    EXPECT_TRUE(r.tick_budget_exceeded);
    EXPECT_EQ(r.term_tick_max(), 20);
}

TEST(Engine, MergedCoverageNeverDropsWithoutFailure) {
    for (Strategy s : {Strategy::WiserX, Strategy::Baseline1, Strategy::Baseline3}) {
        const RunResult r = run(office(s, 11));
        for (std::size_t i = 1; i < r.series.size(); ++i) {
            EXPECT_GE(r.series[i].merged_coverage, r.series[i - 1].merged_coverage) << to_string(s) << " tick " << i;
            EXPECT_EQ(r.series[i].tick, static_cast<Tick>(i));
        }
        EXPECT_EQ(r.first_tick_at(0.0), 0);
    }
}

TEST(Engine, FailureFiresOnFirstTickInsideWindow) {
    ScenarioConfig cfg = office(Strategy::WiserX, 21);
    cfg.failure = FailureSpec{1, 0.4, 0.6};
    Simulation sim(cfg);
    std::optional<Tick> expected;
    while (!sim.done()) {
        const Tick t = sim.tick();
        sim.step();
        const double cov = merged_all(sim, *cfg.map) / 100.0;
        if (!expected && sim.partial_result().fail_tick < 0) {
            EXPECT_FALSE(cov >= 0.4 && cov <= 0.6) << t;
        }
        if (!expected && sim.partial_result().fail_tick >= 0) {
            expected = t;
            EXPECT_TRUE(cov >= 0.4 && cov <= 0.6);
        }
    }
    const RunResult r = sim.finish();
    ASSERT_TRUE(expected);
    ASSERT_TRUE(r.failed_robot);
    EXPECT_EQ(*r.failed_robot, 1);
    EXPECT_EQ(r.fail_tick, *expected);
    const auto fails = std::count_if(r.events.begin(), r.events.end(), [](const Event& e) { return e.kind == EventKind::Fail; });
    EXPECT_EQ(fails, 1);
    EXPECT_EQ(r.final_states[1], AgentState::Failed);
    // From the fail tick on, merged coverage counts survivors only.
    EXPECT_DOUBLE_EQ(r.series[static_cast<std::size_t>(r.fail_tick)].merged_coverage,
                     coverage_percent(r.survivors_at_failure, *cfg.map));
    EXPECT_GE(r.exclusive, r.recovered);
    EXPECT_GE(r.recovered, 0.0);
    EXPECT_EQ(r.term_tick_max(), std::max(r.termination_ticks[0] < 0 ? r.ticks() : r.termination_ticks[0],
                                          r.termination_ticks[2] < 0 ? r.ticks() : r.termination_ticks[2]));
}

TEST(Engine, FailedRobotMapFreezes) {
    ScenarioConfig cfg = office(Strategy::WiserX, 22);
    cfg.failure = FailureSpec{0, 0.3, 0.5};
    Simulation sim(cfg);
    std::optional<LocalMap> frozen;
    while (!sim.done()) {
        sim.step();
        if (!frozen && sim.partial_result().failed_robot) frozen = sim.agents()[0].map;
        if (frozen) EXPECT_TRUE(sim.agents()[0].map == *frozen);
    }
    ASSERT_TRUE(frozen);
}

TEST(Engine, InjectingIntoATerminatedRobotIsANoOp) {
    Simulation sim(office(Strategy::WiserX, 5));
    while (!sim.done() && sim.agents()[0].state != AgentState::Terminated) sim.step();
    ASSERT_EQ(sim.agents()[0].state, AgentState::Terminated);
    const auto events = sim.partial_result().events;
    sim.inject_failure(0);
    EXPECT_EQ(sim.partial_result().events, events);
    EXPECT_EQ(sim.agents()[0].state, AgentState::Terminated);
    EXPECT_FALSE(sim.partial_result().failed_robot);
}

TEST(Engine, NobodyActsAfterTermination) {
    for (Strategy s : {Strategy::WiserX, Strategy::Baseline2}) {
        const RunResult r = run(office(s, 9));
        std::map<RobotId, Tick> ended;
        for (const auto& e : r.events) {
            if (ended.count(e.robot)) ADD_FAILURE() << to_string(s) << " robot " << e.robot << " acted at " << e.tick;
            if (e.kind == EventKind::Terminate) {
                ended[e.robot] = e.tick;
                EXPECT_EQ(r.termination_ticks[static_cast<std::size_t>(e.robot)], e.tick);
            }
        }
    }
}

TEST(Engine, TerminatedRobotMapFreezes) {
    Simulation sim(office(Strategy::WiserX, 13));
    std::map<std::size_t, LocalMap> frozen;
    while (!sim.done()) {
        sim.step();
        for (std::size_t i = 0; i < sim.agents().size(); ++i) {
            const auto& a = sim.agents()[i];
            if (a.state != AgentState::Terminated) continue;
            auto [it, fresh] = frozen.try_emplace(i, a.map);
            if (!fresh) EXPECT_TRUE(it->second == a.map);
        }
    }
    EXPECT_FALSE(frozen.empty());
}

TEST(Engine, RandomStartPosesAreDistinctFreeCells) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ScenarioConfig cfg = office(Strategy::WiserX, seed);
        const auto poses = resolve_start_poses(cfg, seed);
        ASSERT_EQ(poses.size(), 3u);
        std::set<Cell> cells;
        for (const auto& p : poses) {
            const Cell c = cfg.map->geometry().cell_of(p.position());
            EXPECT_TRUE(cfg.map->free(c));
            cells.insert(c);
        }
        EXPECT_EQ(cells.size(), 3u);
    }
}

TEST(Batch, OneTrialEqualsRun) {
    const ScenarioConfig cfg = office(Strategy::Baseline1, 0);
    const auto results = batch({cfg}, 1, 77);
    ASSERT_EQ(results.size(), 1u);
    ScenarioConfig seeded = cfg;
    seeded.seed = 77;
    EXPECT_TRUE(results[0] == run(seeded));
}

TEST(Batch, SerialEqualsParallel) {
    const std::vector<ScenarioConfig> configs{office(Strategy::WiserX, 0), office(Strategy::Baseline2, 0)};
    const auto serial = batch(configs, 3, 500, 1);
    const auto parallel = batch(configs, 3, 500, 4);
    ASSERT_EQ(serial.size(), 6u);
    EXPECT_TRUE(serial == parallel);
    EXPECT_EQ(serial[4].seed, 501u);
    EXPECT_EQ(serial[4].strategy, Strategy::Baseline2);
}

TEST(Batch, ErrorsCarryTheirPosition) {
    ScenarioConfig bad = room(9);
    bad.start_poses = {{0.1, 0.1, 0.0}};
    try {
        batch({room(9), bad}, 2, 0);
        FAIL() << "expected BatchError";
    } catch (const BatchError& e) {
        EXPECT_EQ(e.config_index(), 1u);
        EXPECT_EQ(e.trial(), 0);
    }
    EXPECT_THROW(batch({room(9)}, 0, 0), Error);
}

TEST(Serialize, FileSet) {
    const RunResult plain = run(room(9));
    std::set<std::string> names;
    for (const auto& [name, text] : serialize(plain)) names.insert(name);
    EXPECT_EQ(names, (std::set<std::string>{"config.json", "summary.json", "ticks.csv", "events.csv", "maps/robot_0.txt"}));

    RunOptions traced;
    traced.trace_decisions = true;
    const ScenarioConfig busy = office(Strategy::WiserX, 2);
    const auto files = serialize(Simulation(busy, traced).run());
    ASSERT_TRUE(files.count("decisions.csv"));
    EXPECT_EQ(files.at("decisions.csv").rfind("tick,robot,frontier_id,utility,gain,loss,valid,chosen\n", 0), 0u);
    const auto summary = nlohmann::json::parse(files.at("summary.json"));
    EXPECT_EQ(summary.at("strategy"), "wiserx");
    // Tracing records decisions without changing the run.
    const auto untraced = serialize(run(busy));
    for (const char* name : {"summary.json", "ticks.csv", "events.csv"}) EXPECT_EQ(files.at(name), untraced.at(name));
}
