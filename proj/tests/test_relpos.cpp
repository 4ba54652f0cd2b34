#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "wiserx/wiserx.hpp"

using namespace wiserx;

namespace {

RangeBearing exact(const Pose& observer, Vec2 target) {
    return {distance(observer.position(), target), relative_bearing(observer, target)};
}

bool psd(const Matrix4& p) {
    if (!p.isApprox(p.transpose(), 1e-9)) return false;
    Eigen::SelfAdjointEigenSolver<Matrix4> es(p);
    return es.eigenvalues().minCoeff() >= -1e-9;
}

// Textbook EKF update (simple covariance form), written independently.
void reference_update(Vector4& x, Matrix4& p, RangeBearing z, const Pose& o, MeasurementNoise n) {
    const double dx = x(0) - o.x;
    const double dy = x(1) - o.y;
    const double q = dx * dx + dy * dy;
    Eigen::Matrix<double, 2, 4> h;
    h << dx / std::sqrt(q), dy / std::sqrt(q), 0, 0, -dy / q, dx / q, 0, 0;
    Eigen::Vector2d y(z.range - std::sqrt(q), std::remainder(z.bearing - (std::atan2(dy, dx) - o.heading), 2 * std::numbers::pi));
    Eigen::Matrix2d s = h * p * h.transpose();
    s(0, 0) += n.range_var;
    s(1, 1) += n.bearing_var;
    const Eigen::Matrix<double, 4, 2> k = p * h.transpose() * s.inverse();
    x += k * y;
    p = (Matrix4::Identity() - k * h) * p;
}

}  // namespace

TEST(StableBearing, Examples) {
    const std::vector<double> s{0.50, 0.52, 0.51, 2.90, -1.20};
    EXPECT_NEAR(select_stable_bearing(s), 0.51, 1e-4);
    EXPECT_NEAR(select_stable_bearing(s), oracle::stable_bearing(s), 1e-12);
    EXPECT_DOUBLE_EQ(select_stable_bearing(std::vector<double>{0.3, 0.3, 0.3}), 0.3);
    EXPECT_DOUBLE_EQ(select_stable_bearing(std::vector<double>{1.0}), 1.0);
    EXPECT_THROW(select_stable_bearing(std::vector<double>{}), Error);
}

TEST(StableBearing, WrapsAcrossPi) {
    const std::vector<double> s{3.10, -3.10, 3.12, 0.0};
    EXPECT_LT(oracle::angle_diff(select_stable_bearing(s), std::numbers::pi), 0.05);
}

TEST(StableBearing, PropertyMatchesWindowBruteForce) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    std::uniform_int_distribution<int> len(1, 12);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> s(static_cast<std::size_t>(len(rng)));
        for (auto& x : s) x = u(rng);
        EXPECT_LT(oracle::angle_diff(select_stable_bearing(s), oracle::stable_bearing(s)), 1e-9);
    }
}

TEST(StableBearing, PropertyAtMostOneOutlierStaysWithinThreeSigma) {
    const double sd = 5.0 * std::numbers::pi / 180.0;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, sd);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    std::uniform_int_distribution<int> pos(0, 9);
    int within = 0;
    for (int t = 0; t < 1000; ++t) {
        const double truth = u(rng);
        std::vector<double> s(10);
        for (auto& x : s) x = wrap_angle(truth + g(rng));
        s[static_cast<std::size_t>(pos(rng))] = u(rng);
        within += oracle::angle_diff(select_stable_bearing(s), truth) <= 3 * sd;
    }
    EXPECT_EQ(within, 1000);
}

TEST(AverageRange, Examples) {
    EXPECT_DOUBLE_EQ(average_range(std::vector<double>{5, 5, 5}, 1), 5.0);
    EXPECT_DOUBLE_EQ(average_range(std::vector<double>{4, 100, 6, 100}, 2), 5.0);
    EXPECT_THROW(average_range(std::vector<double>{}, 1), Error);
    EXPECT_THROW(average_range(std::vector<double>{1}, 0), Error);
}

TEST(AverageRange, SeededGaussianMatchesDirectMean) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(7.0, 0.1);
    std::vector<double> s(10);
    for (auto& x : s) x = g(rng);
    double sum = 0.0;
    for (double x : s) sum += x;
    EXPECT_DOUBLE_EQ(average_range(s, 1), sum / 10.0);
}

TEST(Ekf, InitFromMeasurement) {
    const Pose o{1.0, 2.0, std::numbers::pi / 2};
    const auto t = init_track(3, {2.0, -std::numbers::pi / 2}, o, {0.01, 0.001}, 40);
    EXPECT_NEAR(t.position().x, 3.0, 1e-12);
    EXPECT_NEAR(t.position().y, 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(t.covariance(0, 0), 1.01);
    EXPECT_DOUBLE_EQ(t.covariance(2, 2), 1.0);
    EXPECT_DOUBLE_EQ(t.trace_pos, 2.02);
    EXPECT_EQ(t.history.size(), 1u);
    EXPECT_EQ(t.tau, 1);
}

TEST(Ekf, PredictZeroDtIsIdentity) {
    auto t = init_track(0, {2.0, 0.3}, {0, 0, 0}, {0.01, 0.001}, 0);
    const auto before = t;
    ekf_predict(t, 0.0, 0.05);
    EXPECT_EQ(t.state, before.state);
    EXPECT_EQ(t.covariance, before.covariance);
    EXPECT_THROW(ekf_predict(t, -1.0, 0.05), Error);
}

TEST(Ekf, PredictKinematics) {
    RelPosTrack t;
    t.state << 0, 0, 1, 0;
    ekf_predict(t, 2.0, 0.0);
    EXPECT_DOUBLE_EQ(t.state(0), 2.0);
    EXPECT_DOUBLE_EQ(t.state(1), 0.0);
}

TEST(Ekf, PredictClosedFormCovariance) {
    RelPosTrack t;
    t.covariance = Matrix4::Identity();
    ekf_predict(t, 1.0, 0.1);
    // F I F^T = [[2,0,1,0],[0,2,0,1],[1,0,1,0],[0,1,0,1]]; Q(1) adds q/3, q/2, q.
    Matrix4 want;
    want << 2 + 0.1 / 3, 0, 1 + 0.05, 0,  //
        0, 2 + 0.1 / 3, 0, 1 + 0.05,      //
        1 + 0.05, 0, 1 + 0.1, 0,          //
        0, 1 + 0.05, 0, 1 + 0.1;
    EXPECT_TRUE(t.covariance.isApprox(want, 1e-12));
    EXPECT_NEAR(t.trace_pos, 2 * (2 + 0.1 / 3), 1e-12);
}

TEST(Ekf, ZeroInnovationKeepsPositionAndShrinksTrace) {
    const Pose o{0, 0, 0.2};
    auto t = init_track(1, {3.0, 0.5}, o, {0.01, 0.001}, 0);
    const Vec2 p0 = t.position();
    const double tr0 = t.trace_pos;
    ekf_update(t, predict_measurement(t, o), o, {1e-6, 1e-6}, 10);
    EXPECT_NEAR(t.position().x, p0.x, 1e-9);
    EXPECT_NEAR(t.position().y, p0.y, 1e-9);
    EXPECT_LT(t.trace_pos, tr0);
    EXPECT_EQ(t.history.size(), 2u);
}

TEST(Ekf, InnovationWrapsBearing) {
    RelPosTrack t;
    const Pose o{0, 0, 0};
    t.state << std::cos(-3.1), std::sin(-3.1), 0, 0;
    const auto y = innovation(t, {1.0, 3.1}, o);
    EXPECT_NEAR(y(1), 6.2 - 2 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(y(1), -0.0832, 1e-4);
}

TEST(Ekf, NoisyUpdatesMatchReferenceAndConverge) {
    const Pose o{0, 0, 0};
    const Vec2 truth{4.0, -2.0};
    const MeasurementNoise n{0.01, std::pow(5.0 * std::numbers::pi / 180.0, 2)};
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gr(0.0, 0.1);
    std::normal_distribution<double> gb(0.0, std::sqrt(n.bearing_var));
    RangeBearing z0 = exact(o, truth);
    z0.range += 0.8;
    auto t = init_track(1, z0, o, n, 0);
    Vector4 rx = t.state;
    Matrix4 rp = t.covariance;
    const double err0 = distance(t.position(), truth);
    std::vector<double> traces;
    for (int k = 1; k <= 50; ++k) {
        ekf_predict(t, 0.0, 0.05);
        RangeBearing z = exact(o, truth);
        z.range += gr(rng);
        z.bearing = wrap_angle(z.bearing + gb(rng));
        ekf_update(t, z, o, n, k);
        reference_update(rx, rp, z, o, n);
        EXPECT_TRUE(t.state.isApprox(rx, 1e-9));
        EXPECT_TRUE(t.covariance.isApprox(rp, 1e-6));
        traces.push_back(t.trace_pos);
    }
    for (std::size_t k = 5; k < traces.size(); ++k) EXPECT_LE(traces[k], traces[k - 1] + 1e-12);
    EXPECT_LT(distance(t.position(), truth), err0);
}

TEST(Ekf, NoiselessConvergenceWithinTenUpdates) {
    const Pose o{1, 1, 0.7};
    const Vec2 truth{-2.0, 3.5};
    RangeBearing z0 = exact(o, truth);
    z0.range += 0.5;
    z0.bearing += 0.2;
    const MeasurementNoise n{1e-4, 1e-4};
    auto t = init_track(2, z0, o, n, 0);
    for (int k = 1; k <= 10; ++k) {
        ekf_predict(t, 5.0, 0.05);
        ekf_update(t, exact(o, truth), o, n, 10 * k);
    }
    EXPECT_LT(distance(t.position(), truth), 0.01);
}

TEST(Ekf, PropertyCovarianceStaysSymmetricPsd) {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> dt(0.0, 5.0);
    std::uniform_real_distribution<double> var(1e-4, 0.5);
    for (int seq = 0; seq < 1000; ++seq) {
        const Pose o{u(rng), u(rng), u(rng)};
        auto t = init_track(1, {std::abs(u(rng)) + 0.5, u(rng)}, o, {var(rng), var(rng)}, 0);
        for (int k = 1; k <= 10; ++k) {
            ekf_predict(t, dt(rng), 0.05);
            ekf_update(t, {std::abs(u(rng)) + 0.1, u(rng)}, o, {var(rng), var(rng)}, k);
            ASSERT_TRUE(psd(t.covariance));
            ASSERT_NEAR(t.trace_pos, t.covariance(0, 0) + t.covariance(1, 1), 1e-12);
        }
        for (std::size_t k = 1; k < t.history.size(); ++k) ASSERT_LT(t.history[k - 1].tick, t.history[k].tick);
    }
}

TEST(Ekf, SameTickUpdateReplacesHistoryEntry) {
    const Pose o{0, 0, 0};
    auto t = init_track(1, {2.0, 0.0}, o, {0.01, 0.01}, 5);
    ekf_update(t, {2.0, 0.0}, o, {0.01, 0.01}, 5);
    EXPECT_EQ(t.history.size(), 1u);
    EXPECT_EQ(t.history.back().trace_pos, t.trace_pos);
}

TEST(Ekf, DeactivateKeepsHistoryAndBlocksFilter) {
    const Pose o{0, 0, 0};
    auto t = init_track(1, {2.0, 0.0}, o, {0.01, 0.01}, 0);
    ekf_update(t, {2.0, 0.0}, o, {0.01, 0.01}, 10);
    const auto history = t.history;
    deactivate(t);
    EXPECT_EQ(t.tau, 0);
    EXPECT_EQ(t.history, history);
    deactivate(t);
    EXPECT_EQ(t.tau, 0);
    EXPECT_THROW(ekf_update(t, {2.0, 0.0}, o, {0.01, 0.01}, 20), InactiveTrack);
    EXPECT_THROW(ekf_predict(t, 1.0, 0.05), InactiveTrack);
}

TEST(Ekf, SingularInnovationRejected) {
    const Pose o{0, 0, 0};
    RelPosTrack t;
    t.state << 2, 0, 0, 0;
    t.covariance = Matrix4::Zero();
    EXPECT_THROW(ekf_update(t, {2.0, 0.0}, o, {0.0, 0.0}, 1), SingularInnovation);
}
