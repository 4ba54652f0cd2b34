#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/mapping.hpp"

namespace wiserx {

/// Cells to visit after the start cell, in order. `length` sums the step
/// costs (resolution, or sqrt(2) * resolution for a diagonal step).
struct Path {
    std::vector<Cell> waypoints;
    double length = 0.0;
    friend bool operator==(const Path&, const Path&) = default;
};

namespace detail {

struct Move {
    int dr;
    int dc;
    double cost;  // in cells
};

inline constexpr std::array<Move, 8> moves{{{-1, 0, 1.0},
                                            {1, 0, 1.0},
                                            {0, -1, 1.0},
                                            {0, 1, 1.0},
                                            {-1, -1, std::numbers::sqrt2},
                                            {-1, 1, std::numbers::sqrt2},
                                            {1, -1, std::numbers::sqrt2},
                                            {1, 1, std::numbers::sqrt2}}};

/// Octile distance in cells.
inline double octile(Cell a, Cell b) {
    const double dr = std::abs(a.row - b.row);
    const double dc = std::abs(a.col - b.col);
    return std::max(dr, dc) + (std::numbers::sqrt2 - 1.0) * std::min(dr, dc);
}

}  // namespace detail

/// True if a robot may stand in `c` on the way to `goal`.
inline bool traversable(const LocalMap& map, Cell c, Cell goal) {
    if (!map.contains(c)) return false;
    if (c == goal) return map.at(c) != CellState::Occupied;
    return map.is_free(c);
}

/// Diagonal steps need both side cells traversable, so a path never squeezes
/// between two cells that touch only at a corner.
inline bool step_allowed(const LocalMap& map, Cell from, const detail::Move& m, Cell goal) {
    const Cell to{from.row + m.dr, from.col + m.dc};
    if (!traversable(map, to, goal)) return false;
    if (m.dr != 0 && m.dc != 0) {
        return traversable(map, {from.row + m.dr, from.col}, goal) && traversable(map, {from.row, from.col + m.dc}, goal);
    }
    return true;
}

/// A* over the 8-connected grid. Unknown and occupied cells block; the goal
/// itself may be any non-occupied cell. Ties break on (f, h, row, col).
inline std::optional<Path> shortest_path(const LocalMap& map, Cell start, Cell goal) {
    if (!map.is_free(start)) throw Error("shortest_path start must be a free cell");
    if (start == goal) return Path{};
    if (!traversable(map, goal, goal)) return std::nullopt;

    const GridGeometry& geo = map.geometry();
    constexpr double inf = std::numeric_limits<double>::infinity();
    Grid<double> g(geo.rows, geo.cols, inf);
    Grid<Cell> parent(geo.rows, geo.cols, Cell{-1, -1});
    Grid<unsigned char> closed(geo.rows, geo.cols, 0);

    using Entry = std::tuple<double, double, int, int>;  // f, h, row, col
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    g[start] = 0.0;
    open.emplace(detail::octile(start, goal), detail::octile(start, goal), start.row, start.col);

    while (!open.empty()) {
        const auto [f, h, row, col] = open.top();
        open.pop();
        const Cell cur{row, col};
        if (closed[cur]) continue;
        closed[cur] = 1;
        if (cur == goal) break;
        for (const auto& m : detail::moves) {
            if (!step_allowed(map, cur, m, goal)) continue;
            const Cell next{cur.row + m.dr, cur.col + m.dc};
            if (closed[next]) continue;
            const double cand = g[cur] + m.cost;
            if (cand < g[next]) {
                g[next] = cand;
                parent[next] = cur;
                const double hn = detail::octile(next, goal);
                open.emplace(cand + hn, hn, next.row, next.col);
            }
        }
    }
    if (!closed[goal]) return std::nullopt;

    Path path;
    for (Cell c = goal; c != start; c = parent[c]) path.waypoints.push_back(c);
    std::reverse(path.waypoints.begin(), path.waypoints.end());
    path.length = g[goal] * geo.resolution;
    return path;
}

/// Grid distances (m) from `start` to every reachable free cell, with the
/// same step rules as shortest_path. Unreachable cells hold +inf.
inline Grid<double> distance_field(const LocalMap& map, Cell start) {
    const GridGeometry& geo = map.geometry();
    constexpr double inf = std::numeric_limits<double>::infinity();
    Grid<double> dist(geo.rows, geo.cols, inf);
    if (!map.is_free(start)) return dist;
    using Entry = std::tuple<double, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[start] = 0.0;
    open.emplace(0.0, start.row, start.col);
    const Cell no_goal{-1, -1};
    while (!open.empty()) {
        const auto [d, row, col] = open.top();
        open.pop();
        const Cell cur{row, col};
        if (d > dist[cur]) continue;
        for (const auto& m : detail::moves) {
            if (!step_allowed(map, cur, m, no_goal)) continue;
            const Cell next{cur.row + m.dr, cur.col + m.dc};
            const double cand = d + m.cost * geo.resolution;
            if (cand < dist[next]) {
                dist[next] = cand;
                open.emplace(cand, next.row, next.col);
            }
        }
    }
    return dist;
}

/// Polyline from the robot's position through the waypoint centers, with a
/// running distance along it.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(Vec2 start, const Path& path, const GridGeometry& geo) : path_(path) {
        points_.push_back(start);
        cumulative_.push_back(0.0);
        for (Cell c : path.waypoints) {
            const Vec2 p = geo.center(c);
            cumulative_.push_back(cumulative_.back() + distance(points_.back(), p));
            points_.push_back(p);
        }
    }

    [[nodiscard]] double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
    [[nodiscard]] double travelled() const { return travelled_; }
    [[nodiscard]] double progress() const { return length() <= 0.0 ? 1.0 : std::min(1.0, travelled_ / length()); }
    [[nodiscard]] bool finished() const { return progress() >= 1.0; }
    [[nodiscard]] const Path& path() const { return path_; }
    [[nodiscard]] Cell goal() const { return path_.waypoints.empty() ? Cell{-1, -1} : path_.waypoints.back(); }

    /// Waypoints not yet reached.
    [[nodiscard]] std::vector<Cell> remaining() const {
        std::vector<Cell> out;
        for (std::size_t i = 1; i < points_.size(); ++i) {
            if (cumulative_[i] > travelled_) out.push_back(path_.waypoints[i - 1]);
        }
        return out;
    }

    /// Moves `dist` metres forward (clamped at the end). Returns the new
    /// position and the unit direction of the segment being followed.
    std::pair<Vec2, Vec2> advance(double dist) {
        travelled_ = std::min(length(), travelled_ + std::max(0.0, dist));
        if (points_.size() < 2) return {points_.empty() ? Vec2{} : points_.front(), Vec2{1.0, 0.0}};
        std::size_t seg = 1;
        while (seg + 1 < points_.size() && cumulative_[seg] < travelled_) ++seg;
        const Vec2 a = points_[seg - 1];
        const Vec2 b = points_[seg];
        const double seg_len = cumulative_[seg] - cumulative_[seg - 1];
        const double u = seg_len > 0.0 ? std::clamp((travelled_ - cumulative_[seg - 1]) / seg_len, 0.0, 1.0) : 1.0;
        const Vec2 dir = seg_len > 0.0 ? (1.0 / seg_len) * (b - a) : Vec2{1.0, 0.0};
        return {travelled_ >= length() ? points_.back() : a + u * (b - a), dir};
    }

private:
    Path path_;
    std::vector<Vec2> points_;
    std::vector<double> cumulative_;
    double travelled_ = 0.0;
};

struct MotionResult {
    Pose pose;
    double progress = 0.0;
};

/// Advances speed * dt metres along the trajectory; heading follows the
/// direction of motion.
inline MotionResult step_motion(const Pose& pose, Trajectory& traj, double speed, double dt) {
    if (traj.length() <= 0.0) return {pose, 1.0};
    const auto [p, dir] = traj.advance(speed * dt);
    return {{p.x, p.y, std::atan2(dir.y, dir.x)}, traj.progress()};
}

}  // namespace wiserx
