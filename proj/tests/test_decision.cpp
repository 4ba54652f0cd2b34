#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wiserx/wiserx.hpp"

using namespace wiserx;

namespace {

UtilityParams params() { return UtilityParams::for_radius(3.5); }

// 9x9 known box (walls on the border) with the given unknown cells.
LocalMap box_with_unknown(const std::vector<Cell>& unknown) {
    LocalMap m({9, 9, 0.25});
    for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 9; ++c) m.set({r, c}, r == 0 || c == 0 || r == 8 || c == 8 ? CellState::Occupied : CellState::Free);
    }
    for (Cell c : unknown) m.set(c, CellState::Unknown);
    return m;
}

}  // namespace

TEST(Sigmoid, MidpointAsymptotesAndHandValue) {
    UtilityParams p;
    p.kappa1 = 3.5;
    p.kappa2 = 0.5;
    EXPECT_DOUBLE_EQ(sigmoid(3.5, p), 0.5);
    EXPECT_NEAR(sigmoid(2.5, p), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
    EXPECT_NEAR(sigmoid(2.5, p), 0.880797, 1e-6);
    EXPECT_EQ(sigmoid(1e6, p), 0.0);
    EXPECT_EQ(sigmoid(-1e6, p), 1.0);
    EXPECT_FALSE(std::isnan(sigmoid(std::numeric_limits<double>::infinity(), p)));
}

TEST(Sigmoid, PropertyBoundedAndDecreasing) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    const auto p = params();
    for (int i = 0; i < 10000; ++i) {
        const double a = d(rng);
        const double b = d(rng);
        EXPECT_GE(sigmoid(a, p), 0.0);
        EXPECT_LE(sigmoid(a, p), 1.0);
        if (a < b) EXPECT_GE(sigmoid(a, p), sigmoid(b, p));
    }
}

TEST(InformationLoss, Examples) {
    const auto p = params();
    EXPECT_EQ(information_loss({1, 1}, {}, p), 0.0);
    const std::vector<NeighborEstimate> dead{{{1, 1}, 0.5, 0}};
    EXPECT_EQ(information_loss({1, 1}, dead, p), 0.0);
    const std::vector<NeighborEstimate> one{{{0, 0}, 2.0, 1}};
    EXPECT_DOUBLE_EQ(information_loss({p.kappa1, 0}, one, p), 0.25);
}

TEST(InformationGain, Examples) {
    const auto p = params();
    const LocalMap known = box_with_unknown({});
    const auto none = information_gain({4, 4}, known, {}, p);
    EXPECT_EQ(none.gain, 0.0);
    EXPECT_EQ(none.gain_raw, 0.0);

    // One unknown cell 2.75 m away: with kappa1 = 2.75 the sigmoid is 0.5.
    LocalMap big({40, 40, 0.25});
    for (int r = 0; r < 40; ++r) {
        for (int c = 0; c < 40; ++c) big.set({r, c}, CellState::Free);
    }
    big.set({20, 31}, CellState::Unknown);
    UtilityParams q = p;
    q.kappa1 = 2.75;
    const auto g = information_gain({20, 20}, big, {}, q);
    EXPECT_DOUBLE_EQ(g.gain, 0.5);
    EXPECT_DOUBLE_EQ(g.gain_raw, 0.5);

    // A fully trusted neighbour sitting on the only unknown cell cancels it.
    const Vec2 cell = big.geometry().center({20, 31});
    const std::vector<NeighborEstimate> on{{cell, 0.1, 1}};
    const auto h = information_gain({20, 20}, big, on, q);
    EXPECT_EQ(h.gain, 0.0);
    EXPECT_DOUBLE_EQ(h.gain_raw, 0.5);
    EXPECT_DOUBLE_EQ(h.loss, sigmoid(0.0, q));
}

TEST(InformationGain, PropertyNonNegativeAndMonotoneInNeighbours) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::uniform_real_distribution<double> tr(0.0, 4.0);
    const auto p = params();
    for (int i = 0; i < 200; ++i) {
        const LocalMap m = oracle::random_local_map(rng, 20, 20, 0.5, 0.1);
        const Cell vp{static_cast<int>(u(rng) * 4), static_cast<int>(u(rng) * 4)};
        std::vector<NeighborEstimate> est;
        double last = information_gain(vp, m, est, p).gain;
        const double raw = information_gain(vp, m, est, p).gain_raw;
        EXPECT_GE(last, 0.0);
        for (int k = 0; k < 5; ++k) {
            est.push_back({{u(rng), u(rng)}, tr(rng), 1});
            const auto g = information_gain(vp, m, est, p);
            EXPECT_GE(g.gain, 0.0);
            EXPECT_LE(g.gain, last + 1e-12);
            EXPECT_DOUBLE_EQ(g.gain_raw, raw);
            last = g.gain;
        }
    }
}

TEST(InformationLoss, PropertyLargerTraceLowersLoss) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const auto p = params();
    for (int i = 0; i < 1000; ++i) {
        const Vec2 cell{u(rng), u(rng)};
        std::vector<NeighborEstimate> est{{{u(rng), u(rng)}, 1.0 + u(rng), 1}, {{u(rng), u(rng)}, 1.5 + u(rng), 1}};
        const double before = information_loss(cell, est, p);
        for (auto& e : est) e.trace_pos *= 1.5;
        const double after = information_loss(cell, est, p);
        if (before > 1e-12) EXPECT_LT(after, before);
    }
}

TEST(Beta, Examples) {
    const std::vector<Vec2> ten{{10, 0}};
    const std::vector<Vec2> hundred{{0, 100}, {0, 200}};
    const std::vector<Vec2> close{{0.5, 0}};
    EXPECT_DOUBLE_EQ(beta({0, 0}, ten, 0.01), 1.0);
    EXPECT_DOUBLE_EQ(beta({0, 0}, hundred, 0.01), 2.0);
    EXPECT_DOUBLE_EQ(beta({0, 0}, close, 0.01), 0.01);
    EXPECT_DOUBLE_EQ(beta({0, 0}, {}, 0.01), 1.0);
}

TEST(ScoreFrontier, UncontestedFrontierScoresHigher) {
    // A free 5 x 41 strip with one unknown cell at each end; the robot in the
    // middle is 5 m from both, so each viewpoint sees only its own pocket.
    LocalMap m({5, 41, 0.25});
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 41; ++c) m.set({r, c}, CellState::Free);
    }
    m.set({2, 0}, CellState::Unknown);
    m.set({2, 40}, CellState::Unknown);
    const auto fs = extract_frontiers(m, 3.5);
    ASSERT_EQ(fs.size(), 2u);
    const Frontier& west = fs[0].center.col < 20 ? fs[0] : fs[1];
    const Frontier& east = fs[0].center.col < 20 ? fs[1] : fs[0];
    const Pose robot{m.geometry().center({2, 20}).x, m.geometry().center({2, 20}).y, 0.0};
    const auto p = params();

    Hgrid empty(Rect{0, 0, 10.25, 1.25}, 3.5, 0);
    EXPECT_DOUBLE_EQ(score_frontier(west, robot, m, empty, p).utility, score_frontier(east, robot, m, empty, p).utility);

    Hgrid h(Rect{0, 0, 10.25, 1.25}, 3.5, 0);
    h.insert(1, m.geometry().center({2, 1}), 0.2, 0);
    const auto w = score_frontier(west, robot, m, h, p);
    const auto e = score_frontier(east, robot, m, h, p);
    EXPECT_DOUBLE_EQ(w.gain_raw, e.gain_raw);
    EXPECT_LT(w.gain, e.gain);
    EXPECT_GT(e.utility, w.utility);
}

TEST(ScoreFrontier, OwnCellCostClampedToResolution) {
    const LocalMap m = box_with_unknown({{4, 5}});
    const auto fs = extract_frontiers(m, 3.5);
    ASSERT_FALSE(fs.empty());
    const Vec2 at = m.geometry().center(fs[0].center);
    const auto s = score_frontier_with(fs[0], at, m, {}, {}, params());
    EXPECT_TRUE(std::isfinite(s.utility));
    EXPECT_DOUBLE_EQ(s.utility, s.gain / 0.25);
}

TEST(ScoreFrontier, FullyCoveredSurroundingsInvalid) {
    const LocalMap m = box_with_unknown({{4, 7}});
    const auto fs = extract_frontiers(m, 3.5);
    ASSERT_FALSE(fs.empty());
    std::vector<NeighborEstimate> est{{m.geometry().center({4, 7}), 0.5, 1}};
    // A trusted estimate at distance 0 has loss sigmoid(0) < 1; stack enough
    // to exceed the raw gain everywhere.
    for (int i = 0; i < 3; ++i) est.push_back(est.front());
    const auto s = score_frontier_with(fs[0], {0.5, 0.5}, m, est, {}, params());
    EXPECT_FALSE(s.valid);
    EXPECT_EQ(s.gain, 0.0);
    EXPECT_FALSE(frontier_valid(0.0, 0.0, 0.9));
    EXPECT_TRUE(frontier_valid(0.89, 1.0, 0.9));
    EXPECT_FALSE(frontier_valid(0.9, 1.0, 0.9));
}

TEST(ScoreFrontier, NoNeighboursReducesToRawGainOverCost) {
    std::mt19937_64 rng(3);
    const auto p = params();
    for (int i = 0; i < 50; ++i) {
        const LocalMap m = oracle::random_local_map(rng, 20, 20, 0.4, 0.1);
        const Vec2 robot{2.6, 2.4};
        for (const auto& f : extract_frontiers(m, 3.5)) {
            const auto s = score_frontier_with(f, robot, m, {}, {}, p);
            const double cost = std::max(0.25, distance(m.geometry().center(f.center), robot));
            EXPECT_DOUBLE_EQ(s.utility, s.gain_raw / cost);
        }
    }
}

// tau = 0 for robot j gives exactly the scores of a world where j never
// reported anything.
TEST(ScoreFrontier, PropertyTauZeroEqualsNeverInserted) {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const auto p = params();
    for (int i = 0; i < 50; ++i) {
        const LocalMap m = oracle::random_local_map(rng, 20, 20, 0.4, 0.1);
        Hgrid with(Rect{0, 0, 5, 5}, 3.5, 0);
        Hgrid without(Rect{0, 0, 5, 5}, 3.5, 0);
        for (int k = 0; k < 30; ++k) {
            const int robot = k % 3;
            const Vec2 pos{u(rng), u(rng)};
            const double tr = u(rng);
            with.insert(robot, pos, tr, k);
            if (robot != 2) without.insert(robot, pos, tr, k);
        }
        with.set_active(2, false);
        const Pose pose{2.6, 2.4, 0.0};
        for (const auto& f : extract_frontiers(m, 3.5)) {
            const auto a = score_frontier(f, pose, m, with, p);
            const auto b = score_frontier(f, pose, m, without, p);
            EXPECT_EQ(a.utility, b.utility);
            EXPECT_EQ(a.gain, b.gain);
            EXPECT_EQ(a.loss_total, b.loss_total);
            EXPECT_EQ(a.valid, b.valid);
        }
    }
}

TEST(ScoreFrontier, DeactivatingANeighbourRaisesNearbyScores) {
    const LocalMap m = box_with_unknown({{4, 7}, {5, 7}});
    const auto fs = extract_frontiers(m, 3.5);
    ASSERT_FALSE(fs.empty());
    Hgrid h(Rect{0, 0, 2.25, 2.25}, 3.5, 0);
    h.insert(1, m.geometry().center({4, 6}), 0.1, 0);
    const Pose robot{0.4, 0.4, 0.0};
    const auto before = score_frontier(fs[0], robot, m, h, params());
    h.set_active(1, false);
    const auto after = score_frontier(fs[0], robot, m, h, params());
    EXPECT_GT(after.utility, before.utility);
}

TEST(SelectFrontier, Examples) {
    auto s = [](int id, double u, bool valid) {
        FrontierScore f;
        f.frontier_id = id;
        f.utility = u;
        f.valid = valid;
        return f;
    };
    const std::vector<FrontierScore> three{s(0, 0.4, true), s(1, 0.9, true), s(2, 0.1, true)};
    EXPECT_EQ(select_frontier(three, false), 1);
    const std::vector<FrontierScore> invalid{s(0, 0.4, false), s(1, 0.9, false)};
    EXPECT_EQ(select_frontier(invalid, true), std::nullopt);
    EXPECT_EQ(select_frontier(invalid, false), 1);
    const std::vector<FrontierScore> tie{s(4, 0.7, true), s(2, 0.7, true)};
    EXPECT_EQ(select_frontier(tie, false), 2);
    EXPECT_EQ(select_frontier({}, false), std::nullopt);
}

TEST(SelectFrontier, PropertyScaleInvariant) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<FrontierScore> a(5);
        for (int k = 0; k < 5; ++k) {
            a[static_cast<std::size_t>(k)].frontier_id = k;
            a[static_cast<std::size_t>(k)].utility = u(rng);
            a[static_cast<std::size_t>(k)].valid = u(rng) < 0.5;
        }
        auto b = a;
        const double scale = 0.1 + 10 * u(rng);
        for (auto& x : b) x.utility *= scale;
        EXPECT_EQ(select_frontier(a, true), select_frontier(b, true));
        EXPECT_EQ(select_frontier(a, false), select_frontier(b, false));
    }
}

TEST(CommitmentCheck, Examples) {
    EXPECT_FALSE(commitment_check(0.49, true));
    EXPECT_TRUE(commitment_check(0.5, true));
    EXPECT_TRUE(commitment_check(0.2, false));
}

TEST(ShouldTerminate, Examples) {
    FrontierScore valid;
    valid.valid = true;
    FrontierScore invalid;
    const std::vector<FrontierScore> some{valid, invalid};
    const std::vector<FrontierScore> none{invalid, invalid};
    EXPECT_EQ(should_terminate(some, 0.96, 0.80, 0.95), TerminationDecision::Terminate);
    EXPECT_EQ(should_terminate(none, 0.85, 0.80, 0.95), TerminationDecision::Terminate);
    EXPECT_EQ(should_terminate(some, 0.5, 0.80, 0.95), TerminationDecision::Continue);
    EXPECT_EQ(should_terminate(none, 0.5, 0.80, 0.95), TerminationDecision::Continue);
    EXPECT_EQ(should_terminate({}, 0.1, 0.80, 0.95), TerminationDecision::Terminate);
}
