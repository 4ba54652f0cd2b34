#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wiserx/common.hpp"

namespace wiserx {

using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;

struct TrackSample {
    Tick tick = 0;
    Vec2 position;
    double trace_pos = 0.0;
    friend bool operator==(const TrackSample&, const TrackSample&) = default;
};

/// Constant-velocity EKF track of one neighbour, in the observer's map frame.
/// State is (x, y, vx, vy).
struct RelPosTrack {
    RobotId target_id = 0;
    Vector4 state = Vector4::Zero();
    Matrix4 covariance = Matrix4::Identity();
    double trace_pos = 2.0;
    Tick last_update_tick = 0;
    int tau = 1;
    std::vector<TrackSample> history;

    [[nodiscard]] Vec2 position() const { return {state(0), state(1)}; }
};

/// Fused range/bearing measurement; bearing is relative to the observer heading.
struct RangeBearing {
    double range = 0.0;
    double bearing = 0.0;
};

struct MeasurementNoise {
    double range_var = 0.0;    // m^2
    double bearing_var = 0.0;  // rad^2
};

namespace detail {

inline std::pair<double, double> circular_mean_and_variance(std::span<const double> angles) {
    double s = 0.0;
    double c = 0.0;
    for (double a : angles) {
        s += std::sin(a);
        c += std::cos(a);
    }
    const double n = static_cast<double>(angles.size());
    const double resultant = std::hypot(s, c) / n;
    return {std::atan2(s, c), 1.0 - resultant};
}

}  // namespace detail

/// Circular mean of the length-min(3, n) window with the least circular
/// variance; the earliest window wins ties.
inline double select_stable_bearing(std::span<const double> samples) {
    if (samples.empty()) throw Error("select_stable_bearing needs at least one sample");
    if (samples.size() == 1) return samples.front();
    const std::size_t w = std::min<std::size_t>(3, samples.size());
    double best_var = std::numeric_limits<double>::infinity();
    double best_mean = samples.front();
    for (std::size_t i = 0; i + w <= samples.size(); ++i) {
        const auto [mean, var] = detail::circular_mean_and_variance(samples.subspan(i, w));
        if (var < best_var) {
            best_var = var;
            best_mean = mean;
        }
    }
    return best_mean;
}

/// Mean of samples[0], samples[stride], samples[2*stride], ...
inline double average_range(std::span<const double> samples, int stride) {
    if (samples.empty()) throw Error("average_range needs at least one sample");
    if (stride < 1) throw Error("average_range stride must be >= 1");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(stride)) {
        sum += samples[i];
        ++n;
    }
    return sum / static_cast<double>(n);
}

/// New track at the measured position with zero velocity and covariance
/// diag(var_r + 1, var_r + 1, 1, 1).
inline RelPosTrack init_track(RobotId target, RangeBearing meas, const Pose& observer, MeasurementNoise noise, Tick tick) {
    RelPosTrack t;
    t.target_id = target;
    const double heading = observer.heading + meas.bearing;
    t.state << observer.x + meas.range * std::cos(heading), observer.y + meas.range * std::sin(heading), 0.0, 0.0;
    t.covariance = Matrix4::Zero();
    t.covariance.diagonal() << noise.range_var + 1.0, noise.range_var + 1.0, 1.0, 1.0;
    t.trace_pos = t.covariance(0, 0) + t.covariance(1, 1);
    t.last_update_tick = tick;
    t.history.push_back({tick, t.position(), t.trace_pos});
    return t;
}

inline Matrix4 cv_transition(double dt) {
    Matrix4 f = Matrix4::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

/// White-acceleration process noise of intensity q.
inline Matrix4 cv_process_noise(double dt, double q) {
    Matrix4 m = Matrix4::Zero();
    const double a = q * dt * dt * dt / 3.0;
    const double b = q * dt * dt / 2.0;
    const double c = q * dt;
    m(0, 0) = a;
    m(1, 1) = a;
    m(0, 2) = b;
    m(2, 0) = b;
    m(1, 3) = b;
    m(3, 1) = b;
    m(2, 2) = c;
    m(3, 3) = c;
    return m;
}

inline void ekf_predict(RelPosTrack& track, double dt, double q) {
    if (track.tau == 0) throw InactiveTrack("predict on a deactivated track");
    if (dt < 0.0) throw Error("ekf_predict needs dt >= 0");
    const Matrix4 f = cv_transition(dt);
    track.state = f * track.state;
    track.covariance = f * track.covariance * f.transpose() + cv_process_noise(dt, q);
    track.trace_pos = track.covariance(0, 0) + track.covariance(1, 1);
}

/// Predicted measurement h(state) seen from `observer`.
inline RangeBearing predict_measurement(const RelPosTrack& track, const Pose& observer) {
    const double dx = track.state(0) - observer.x;
    const double dy = track.state(1) - observer.y;
    return {std::hypot(dx, dy), wrap_angle(std::atan2(dy, dx) - observer.heading)};
}

/// z - h(x) with the bearing component wrapped into (-pi, pi].
inline Eigen::Vector2d innovation(const RelPosTrack& track, RangeBearing meas, const Pose& observer) {
    const RangeBearing h = predict_measurement(track, observer);
    return {meas.range - h.range, wrap_angle(meas.bearing - h.bearing)};
}

/// EKF correction with a Joseph-form covariance update. Appends the
/// corrected estimate to the history; a second update in the same tick
/// replaces that tick's entry.
inline void ekf_update(RelPosTrack& track, RangeBearing meas, const Pose& observer, MeasurementNoise noise, Tick tick) {
    if (track.tau == 0) throw InactiveTrack("update on a deactivated track");
    if (meas.range < 0.0) throw Error("ekf_update needs range >= 0");

    const double dx = track.state(0) - observer.x;
    const double dy = track.state(1) - observer.y;
    const double rho2 = std::max(dx * dx + dy * dy, 1e-12);
    const double rho = std::sqrt(rho2);

    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = dx / rho;
    h(0, 1) = dy / rho;
    h(1, 0) = -dy / rho2;
    h(1, 1) = dx / rho2;

    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r(0, 0) = noise.range_var;
    r(1, 1) = noise.bearing_var;

    const Eigen::Vector2d y = innovation(track, meas, observer);
    const Eigen::Matrix2d s = h * track.covariance * h.transpose() + r;
    const double det = s.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) throw SingularInnovation("innovation covariance is singular");

    const Eigen::Matrix<double, 4, 2> k = track.covariance * h.transpose() * s.inverse();
    track.state += k * y;
    const Matrix4 i_kh = Matrix4::Identity() - k * h;
    Matrix4 p = i_kh * track.covariance * i_kh.transpose() + k * r * k.transpose();
    track.covariance = 0.5 * (p + p.transpose());
    track.trace_pos = track.covariance(0, 0) + track.covariance(1, 1);
    track.last_update_tick = tick;

    const TrackSample sample{tick, track.position(), track.trace_pos};
    if (!track.history.empty() && track.history.back().tick >= tick) {
        track.history.back() = sample;
    } else {
        track.history.push_back(sample);
    }
}

/// Marks the neighbour as failed; history is kept.
inline void deactivate(RelPosTrack& track) { track.tau = 0; }

}  // namespace wiserx
