#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/mapping.hpp"
#include "wiserx/world.hpp"

namespace wiserx {

/// Cellwise union in the ground frame: occupied wins over free, free over
/// unknown. Maps flagged as failed are skipped when `exclude_failed` is set.
inline LocalMap merge_maps(std::span<const LocalMap* const> maps, std::span<const bool> failed, bool exclude_failed) {
    if (maps.empty()) throw EmptyInput("merge_maps needs at least one map");
    if (!failed.empty() && failed.size() != maps.size()) throw ShapeMismatch("one failure flag per map expected");
    const GridGeometry geo = maps.front()->geometry();
    LocalMap merged(geo);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const LocalMap& m = *maps[i];
        if (m.rows() != geo.rows || m.cols() != geo.cols || m.resolution() != geo.resolution) {
            throw ShapeMismatch("maps differ in shape or resolution");
        }
        if (exclude_failed && !failed.empty() && failed[i]) continue;
        const Cell off = m.frame();
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) {
                const CellState s = m.at({r, c});
                const Cell g{r + off.row, c + off.col};
                if (s == CellState::Unknown || !merged.contains(g)) continue;
                if (s == CellState::Occupied) {
                    merged.set(g, CellState::Occupied);
                } else if (merged.at(g) == CellState::Unknown) {
                    merged.set(g, CellState::Free);
                }
            }
        }
    }
    return merged;
}

inline LocalMap merge_maps(std::span<const LocalMap* const> maps) { return merge_maps(maps, {}, false); }

/// Percentage of ground-truth free cells that the merged map knows.
inline double coverage_percent(const LocalMap& merged, const GroundTruthMap& truth) {
    if (merged.rows() != truth.rows() || merged.cols() != truth.cols()) throw ShapeMismatch("map and ground truth differ in shape");
    std::size_t known = 0;
    for (int r = 0; r < truth.rows(); ++r) {
        for (int c = 0; c < truth.cols(); ++c) {
            if (truth.free({r, c}) && merged.at({r, c}) != CellState::Unknown) ++known;
        }
    }
    return 100.0 * static_cast<double>(known) / static_cast<double>(truth.free_count());
}

/// Percentage of known free space (ground-truth free cells known by at
/// least one robot) that two or more robots know.
inline double pairwise_overlap(std::span<const LocalMap* const> maps, const GroundTruthMap& truth) {
    std::size_t union_count = 0;
    std::size_t shared = 0;
    for (int r = 0; r < truth.rows(); ++r) {
        for (int c = 0; c < truth.cols(); ++c) {
            if (!truth.free({r, c})) continue;
            int knowers = 0;
            for (const LocalMap* m : maps) {
                const Cell off = m->frame();
                if (m->at({r - off.row, c - off.col}) != CellState::Unknown) ++knowers;
            }
            if (knowers >= 1) ++union_count;
            if (knowers >= 2) ++shared;
        }
    }
    return union_count == 0 ? 0.0 : 100.0 * static_cast<double>(shared) / static_cast<double>(union_count);
}

/// Percentage of ground-truth free cells that `failed_map` alone knew at the
/// failure (absent from `survivors_at_failure`) and `survivors_final` knows.
inline double recovered_percent(const LocalMap& failed_map, const LocalMap& survivors_at_failure,
                                const LocalMap& survivors_final, const GroundTruthMap& truth) {
    std::size_t recovered = 0;
    for (int r = 0; r < truth.rows(); ++r) {
        for (int c = 0; c < truth.cols(); ++c) {
            const Cell cell{r, c};
            if (!truth.free(cell)) continue;
            const bool exclusive = failed_map.at(cell) != CellState::Unknown && survivors_at_failure.at(cell) == CellState::Unknown;
            if (exclusive && survivors_final.at(cell) != CellState::Unknown) ++recovered;
        }
    }
    return 100.0 * static_cast<double>(recovered) / static_cast<double>(truth.free_count());
}

/// Percentage of ground-truth free cells known only by the failed robot.
inline double exclusive_percent(const LocalMap& failed_map, const LocalMap& survivors_at_failure, const GroundTruthMap& truth) {
    std::size_t n = 0;
    for (int r = 0; r < truth.rows(); ++r) {
        for (int c = 0; c < truth.cols(); ++c) {
            const Cell cell{r, c};
            if (truth.free(cell) && failed_map.at(cell) != CellState::Unknown &&
                survivors_at_failure.at(cell) == CellState::Unknown) {
                ++n;
            }
        }
    }
    return 100.0 * static_cast<double>(n) / static_cast<double>(truth.free_count());
}

}  // namespace wiserx
