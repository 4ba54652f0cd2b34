#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/raycast.hpp"
#include "wiserx/rng.hpp"
#include "wiserx/world.hpp"

namespace wiserx {

struct Beam {
    double angle = 0.0;  // world frame, rad
    double range = 0.0;  // hit distance, or the sensor radius when nothing was hit
    bool hit = false;    // false marks a MaxRange return
    Cell cell{-1, -1};   // the struck cell on a hit; a range alone is ambiguous at grid corners
    friend bool operator==(const Beam&, const Beam&) = default;
};

struct LidarScan {
    Pose origin;
    double resolution = 0.0;
    double max_range = 0.0;
    std::vector<Beam> beams;
    friend bool operator==(const LidarScan&, const LidarScan&) = default;
};

/// 360 degree scan by grid traversal. Beam k points along 2*pi*k/beams in
/// the world frame and reports the entry distance of the first occupied cell,
/// capped at `radius`.
inline LidarScan lidar_scan(const Pose& pose, const GroundTruthMap& map, double radius, int beams) {
    const GridGeometry geo = map.geometry();
    if (map.occupied(geo.cell_of(pose.position()))) throw PoseInOccupied("scan origin lies in an occupied cell");

    LidarScan scan{pose, geo.resolution, radius, {}};
    scan.beams.reserve(static_cast<std::size_t>(beams));
    for (int k = 0; k < beams; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / beams;
        Beam beam{angle, radius, false};
        traverse_ray(geo, pose.position(), angle, radius, [&](Cell c, double t) {
            if (map.occupied(c)) {
                beam.range = std::min(t, radius);
                beam.hit = true;
                beam.cell = c;
                return false;
            }
            return true;
        });
        scan.beams.push_back(beam);
    }
    return scan;
}

struct PingSampleSet {
    RobotId observer_id = 0;
    RobotId target_id = 0;
    Tick tick = 0;
    std::vector<double> bearing_samples;
    std::vector<double> range_samples;
    double true_range = 0.0;    // test oracle only
    double true_bearing = 0.0;  // test oracle only
};

struct PingNoise {
    double bearing_std = 0.0;
    double range_std = 0.0;
};

/// Bearing of `target` seen from `observer`, relative to the observer heading.
inline double relative_bearing(const Pose& observer, Vec2 target) {
    return wrap_angle(std::atan2(target.y - observer.y, target.x - observer.x) - observer.heading);
}

/// W noisy range/bearing samples. Per sample the draws are, in order: the
/// multipath coin, the bearing (Gaussian, or a uniform outlier on a hit),
/// the range noise. Ranges are never multipath-corrupted.
inline PingSampleSet ping_measurement(const Pose& observer, const Pose& target, PingNoise noise,
                                      double multipath_prob, int window, Rng& rng) {
    PingSampleSet set;
    set.true_range = distance(observer.position(), target.position());
    set.true_bearing = relative_bearing(observer, target.position());
    set.bearing_samples.reserve(static_cast<std::size_t>(window));
    set.range_samples.reserve(static_cast<std::size_t>(window));

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < window; ++i) {
        const bool outlier = unit(rng) < multipath_prob;
        double bearing = 0.0;
        if (outlier) {
            bearing = std::numbers::pi - 2.0 * std::numbers::pi * unit(rng);
        } else {
            bearing = wrap_angle(set.true_bearing + noise.bearing_std * gauss(rng));
        }
        gauss.reset();
        const double range = std::max(0.0, set.true_range + noise.range_std * gauss(rng));
        gauss.reset();
        set.bearing_samples.push_back(bearing);
        set.range_samples.push_back(range);
    }
    return set;
}

}  // namespace wiserx
