#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/hgrid.hpp"
#include "wiserx/mapping.hpp"

namespace wiserx {

struct UtilityParams {
    double kappa1 = 0.8 * 3.5;  // sigmoid midpoint (m)
    double kappa2 = 3.5 / 6.0;  // sigmoid steepness (m)
    double r = 3.5;             // sensor radius (m)
    double invalid_ratio = 0.90;
    double beta_floor = 0.01;
    double query_radius_mult = 2.0;

    static UtilityParams for_radius(double radius) {
        UtilityParams p;
        p.r = radius;
        p.kappa1 = 0.8 * radius;
        p.kappa2 = radius / 6.0;
        return p;
    }
};

/// 1 / (1 + exp((d - kappa1) / kappa2)), evaluated without overflow.
inline double sigmoid(double d, const UtilityParams& p) {
    const double z = (d - p.kappa1) / p.kappa2;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

struct NeighborEstimate {
    Vec2 position;
    double trace_pos = 0.0;
    int tau = 1;
};

/// Confidence weight min(1, 1/trace); a zero trace counts as fully certain.
inline double trace_weight(double trace_pos) { return trace_pos <= 1.0 ? 1.0 : 1.0 / trace_pos; }

/// Expected information already collected around `cell` by neighbours.
inline double information_loss(Vec2 cell, std::span<const NeighborEstimate> estimates, const UtilityParams& p) {
    double loss = 0.0;
    for (const auto& e : estimates) {
        if (e.tau == 0) continue;
        loss += trace_weight(e.trace_pos) * sigmoid(distance(e.position, cell), p);
    }
    return loss;
}

struct GainResult {
    double gain = 0.0;      // sum over unknown cells of max(0, S - E)
    double gain_raw = 0.0;  // same sum with E = 0
    double loss = 0.0;      // sum of E over the same cells
};

namespace detail {

/// Per-cell information loss, computed lazily and reused across the
/// viewpoints of one frontier.
class LossCache {
public:
    LossCache(const GridGeometry& geo, std::span<const NeighborEstimate> estimates, const UtilityParams& p)
        : geo_(geo), estimates_(estimates), params_(p) {
        if (!estimates.empty()) values_.assign(static_cast<std::size_t>(geo.rows) * static_cast<std::size_t>(geo.cols), -1.0);
    }

    double operator()(Cell c) {
        if (estimates_.empty()) return 0.0;
        double& v = values_[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(geo_.cols) + static_cast<std::size_t>(c.col)];
        if (v < 0.0) v = information_loss(geo_.center(c), estimates_, params_);
        return v;
    }

private:
    GridGeometry geo_;
    std::span<const NeighborEstimate> estimates_;
    UtilityParams params_;
    std::vector<double> values_;
};

template <class LossFn>
GainResult gain_with(Cell viewpoint, const LocalMap& map, const UtilityParams& p, LossFn&& loss_of) {
    const GridGeometry& geo = map.geometry();
    const Vec2 vp = geo.center(viewpoint);
    const int reach = static_cast<int>(std::ceil(p.r / geo.resolution));
    GainResult out;
    for (int r = viewpoint.row - reach; r <= viewpoint.row + reach; ++r) {
        for (int c = viewpoint.col - reach; c <= viewpoint.col + reach; ++c) {
            const Cell cell{r, c};
            if (!map.is_unknown(cell)) continue;
            const double d = distance(geo.center(cell), vp);
            if (d > p.r) continue;
            const double s = sigmoid(d, p);
            const double e = loss_of(cell);
            out.gain += std::max(0.0, s - e);
            out.gain_raw += s;
            out.loss += e;
        }
    }
    return out;
}

}  // namespace detail

/// Information gain of the unknown cells within r of `viewpoint`, net of
/// neighbour overlap.
inline GainResult information_gain(Cell viewpoint, const LocalMap& map, std::span<const NeighborEstimate> estimates,
                                   const UtilityParams& p) {
    detail::LossCache cache(map.geometry(), estimates, p);
    return detail::gain_with(viewpoint, map, p, cache);
}

/// log10 of the distance to the nearest active neighbour, floored at
/// beta_floor. With no neighbour the scale is 1.
inline double beta(Vec2 viewpoint, std::span<const Vec2> neighbor_positions, double beta_floor) {
    if (neighbor_positions.empty()) return 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (Vec2 n : neighbor_positions) best = std::min(best, distance(n, viewpoint));
    return std::max(beta_floor, std::log10(best));
}

struct FrontierScore {
    int frontier_id = 0;
    double utility = 0.0;
    double gain = 0.0;
    double gain_raw = 0.0;
    double loss_total = 0.0;
    bool valid = false;
    Cell best_viewpoint;
};

inline bool frontier_valid(double loss_total, double gain_raw, double invalid_ratio) {
    return gain_raw > 0.0 && loss_total / gain_raw < invalid_ratio;
}

/// Scores a frontier from explicit neighbour inputs: the best of the three
/// viewpoints under beta * I / C, with C the distance from the robot to the
/// frontier center, floored at one cell.
inline FrontierScore score_frontier_with(const Frontier& f, Vec2 robot, const LocalMap& map,
                                         std::span<const NeighborEstimate> estimates,
                                         std::span<const Vec2> neighbor_positions, const UtilityParams& p) {
    const GridGeometry& geo = map.geometry();
    const double cost = std::max(geo.resolution, distance(geo.center(f.center), robot));
    detail::LossCache cache(geo, estimates, p);

    FrontierScore best;
    best.frontier_id = f.id;
    best.utility = -std::numeric_limits<double>::infinity();
    for (Cell vp : f.viewpoints) {
        const GainResult g = detail::gain_with(vp, map, p, cache);
        const double u = beta(geo.center(vp), neighbor_positions, p.beta_floor) * g.gain / cost;
        if (u > best.utility) {
            best.utility = u;
            best.gain = g.gain;
            best.gain_raw = g.gain_raw;
            best.loss_total = g.loss;
            best.best_viewpoint = vp;
        }
    }
    best.valid = frontier_valid(best.loss_total, best.gain_raw, p.invalid_ratio);
    return best;
}

/// Neighbour estimates stored in `hgrid` within query_radius_mult * r of
/// `point`, excluding the owner's own positions.
inline std::vector<NeighborEstimate> neighbor_estimates_near(const Hgrid& hgrid, Vec2 point, const UtilityParams& p) {
    std::vector<NeighborEstimate> out;
    for (const Estimate& e : hgrid.query_near(point, p.query_radius_mult * p.r)) {
        if (e.robot_id == hgrid.owner()) continue;
        out.push_back({e.position, e.trace_pos, 1});
    }
    return out;
}

inline FrontierScore score_frontier(const Frontier& f, const Pose& robot, const LocalMap& map, const Hgrid& hgrid,
                                    const UtilityParams& p) {
    const auto estimates = neighbor_estimates_near(hgrid, map.geometry().center(f.center), p);
    const auto neighbors = hgrid.latest_neighbor_positions();
    return score_frontier_with(f, robot.position(), map, estimates, neighbors, p);
}

/// Highest-utility frontier; once the soft threshold is reached only valid
/// frontiers compete. Ties go to the lower frontier id.
inline std::optional<int> select_frontier(std::span<const FrontierScore> scores, bool soft_reached) {
    const FrontierScore* best = nullptr;
    for (const auto& s : scores) {
        if (soft_reached && !s.valid) continue;
        if (!best || s.utility > best->utility || (s.utility == best->utility && s.frontier_id < best->frontier_id)) best = &s;
    }
    if (!best) return std::nullopt;
    return best->frontier_id;
}

/// Re-evaluate once the robot is half-way along its path, or at once if its
/// goal frontier has vanished.
inline bool commitment_check(double progress, bool goal_still_frontier) { return progress >= 0.5 || !goal_still_frontier; }

enum class TerminationDecision { Continue, Terminate };

inline TerminationDecision should_terminate(std::span<const FrontierScore> scores, double coverage, double soft,
                                            double hard) {
    if (scores.empty() || coverage >= hard) return TerminationDecision::Terminate;
    if (coverage >= soft && std::none_of(scores.begin(), scores.end(), [](const auto& s) { return s.valid; })) {
        return TerminationDecision::Terminate;
    }
    return TerminationDecision::Continue;
}

}  // namespace wiserx
