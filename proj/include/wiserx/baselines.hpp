#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/decision.hpp"
#include "wiserx/mapping.hpp"

namespace wiserx {

/// Utility of every frontier with no neighbour terms: the best viewpoint
/// under gain_raw / C, as scored by the WiSER-X core with an empty hgrid.
inline std::vector<FrontierScore> score_independent(std::span<const Frontier> frontiers, const LocalMap& map, Vec2 robot,
                                                    const UtilityParams& p) {
    std::vector<FrontierScore> out;
    out.reserve(frontiers.size());
    for (const auto& f : frontiers) out.push_back(score_frontier_with(f, robot, map, {}, {}, p));
    return out;
}

/// Baseline 1: independent exploration, ignoring every other robot.
inline std::optional<int> baseline1_select(std::span<const Frontier> frontiers, const LocalMap& map, const Pose& robot,
                                           const UtilityParams& p) {
    const auto scores = score_independent(frontiers, map, robot.position(), p);
    return select_frontier(scores, false);
}

/// Baseline 2: a global assigner with the merged map. Repeatedly takes the
/// (robot, frontier) pair with the highest gain_raw / C among unassigned
/// robots and frontiers. Ties go to the lower robot id, then lower frontier id.
/// `reachable`, when given, vetoes (robot, frontier) pairs.
inline std::map<RobotId, int> baseline2_assign(
    const LocalMap& merged, const std::map<RobotId, Pose>& robots, std::span<const Frontier> frontiers,
    const UtilityParams& p, const std::function<bool(RobotId, const Frontier&)>& reachable = nullptr) {
    std::map<RobotId, int> assignment;
    if (frontiers.empty() || robots.empty()) return assignment;

    // Gain depends only on the viewpoint, so evaluate each viewpoint once.
    std::vector<std::array<double, 3>> gains(frontiers.size());
    for (std::size_t i = 0; i < frontiers.size(); ++i) {
        for (std::size_t v = 0; v < 3; ++v) gains[i][v] = information_gain(frontiers[i].viewpoints[v], merged, {}, p).gain_raw;
    }
    const GridGeometry& geo = merged.geometry();

    std::vector<char> taken(frontiers.size(), 0);
    std::map<RobotId, Pose> pending = robots;
    while (!pending.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        RobotId best_robot = -1;
        std::size_t best_frontier = 0;
        for (const auto& [id, pose] : pending) {
            for (std::size_t i = 0; i < frontiers.size(); ++i) {
                if (taken[i] || (reachable && !reachable(id, frontiers[i]))) continue;
                const double cost = std::max(geo.resolution, distance(geo.center(frontiers[i].center), pose.position()));
                const double value = *std::max_element(gains[i].begin(), gains[i].end()) / cost;
                if (value > best) {
                    best = value;
                    best_robot = id;
                    best_frontier = i;
                }
            }
        }
        if (best_robot < 0) break;
        assignment[best_robot] = frontiers[best_frontier].id;
        taken[best_frontier] = 1;
        pending.erase(best_robot);
    }
    return assignment;
}

struct Partition {
    std::vector<Rect> regions;
};

/// Baseline 3: n vertical strips of equal width.
inline Partition baseline3_partition(const Rect& bounds, int n) {
    if (n < 1) throw Error("baseline3_partition needs n >= 1");
    Partition part;
    const double w = bounds.width() / n;
    for (int i = 0; i < n; ++i) {
        const double x0 = bounds.min_x + i * w;
        const double x1 = i + 1 == n ? bounds.max_x : bounds.min_x + (i + 1) * w;
        part.regions.push_back({x0, bounds.min_y, x1, bounds.max_y});
    }
    return part;
}

/// A cell belongs to the strip holding its center; the last strip is closed
/// on the right.
inline bool in_region(const Rect& region, Vec2 p, const Rect& bounds) {
    const bool right_ok = p.x < region.max_x || (region.max_x >= bounds.max_x && p.x <= region.max_x);
    const bool top_ok = p.y < region.max_y || (region.max_y >= bounds.max_y && p.y <= region.max_y);
    return p.x >= region.min_x && right_ok && p.y >= region.min_y && top_ok;
}

/// Each frontier cut down to its cells inside `region`, with center and
/// viewpoints recomputed and the id kept. Frontiers with no such cell vanish,
/// so every result has its center in the region.
inline std::vector<Frontier> clip_to_region(std::span<const Frontier> frontiers, const GridGeometry& geo, const Rect& region,
                                            const Rect& bounds) {
    std::vector<Frontier> out;
    for (const auto& f : frontiers) {
        std::vector<Cell> inside;
        for (Cell c : f.cells) {
            if (in_region(region, geo.center(c), bounds)) inside.push_back(c);
        }
        if (inside.empty()) continue;
        if (inside.size() == f.cells.size()) {
            out.push_back(f);
            continue;
        }
        Frontier g = detail::make_frontier(inside, principal_axis(inside));
        g.id = f.id;
        out.push_back(std::move(g));
    }
    return out;
}

/// Baseline 1 selection over the frontier parts lying in `region`.
inline std::optional<int> baseline3_select(std::span<const Frontier> frontiers, const LocalMap& map, const Pose& robot,
                                           const Rect& region, const Rect& bounds, const UtilityParams& p) {
    return baseline1_select(clip_to_region(frontiers, map.geometry(), region, bounds), map, robot, p);
}

}  // namespace wiserx
