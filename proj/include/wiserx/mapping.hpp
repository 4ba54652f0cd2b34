#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/raycast.hpp"
#include "wiserx/sensing.hpp"

namespace wiserx {

enum class CellState : unsigned char { Unknown, Free, Occupied };

/// A robot's own occupancy grid. `frame` is the cell offset of the local
/// origin in the ground frame; it is only read by evaluation code.
class LocalMap {
public:
    LocalMap() = default;
    explicit LocalMap(GridGeometry geo, Cell frame = {}) : geo_(geo), frame_(frame), cells_(geo.rows, geo.cols, CellState::Unknown) {}

    [[nodiscard]] const GridGeometry& geometry() const { return geo_; }
    [[nodiscard]] double resolution() const { return geo_.resolution; }
    [[nodiscard]] int rows() const { return geo_.rows; }
    [[nodiscard]] int cols() const { return geo_.cols; }
    [[nodiscard]] Cell frame() const { return frame_; }
    [[nodiscard]] bool contains(Cell c) const { return cells_.contains(c); }

    [[nodiscard]] CellState at(Cell c) const { return cells_.contains(c) ? cells_[c] : CellState::Unknown; }
    [[nodiscard]] bool is_free(Cell c) const { return at(c) == CellState::Free; }
    [[nodiscard]] bool is_unknown(Cell c) const { return cells_.contains(c) && cells_[c] == CellState::Unknown; }

    /// Occupied evidence is sticky: a free observation never clears it.
    void mark_free(Cell c) {
        if (cells_.contains(c) && cells_[c] == CellState::Unknown) cells_[c] = CellState::Free;
    }
    void mark_occupied(Cell c) {
        if (cells_.contains(c)) cells_[c] = CellState::Occupied;
    }
    void set(Cell c, CellState s) { cells_[c] = s; }

    [[nodiscard]] const Grid<CellState>& cells() const { return cells_; }

    [[nodiscard]] std::size_t known_count() const {
        return static_cast<std::size_t>(std::count_if(cells_.data().begin(), cells_.data().end(),
                                                      [](CellState s) { return s != CellState::Unknown; }));
    }

    /// ASCII dump: '#' occupied, '.' free, '?' unknown.
    [[nodiscard]] std::string to_text() const {
        std::string out;
        for (int r = 0; r < rows(); ++r) {
            for (int c = 0; c < cols(); ++c) {
                const CellState s = cells_[{r, c}];
                out.push_back(s == CellState::Free ? '.' : s == CellState::Occupied ? '#' : '?');
            }
            out.push_back('\n');
        }
        return out;
    }

    static LocalMap from_text(std::string_view text, double resolution) {
        std::vector<std::string_view> lines;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            lines.push_back(text.substr(pos, end - pos));
            pos = end + 1;
        }
        if (lines.empty()) throw Error("empty map snapshot");
        LocalMap map({static_cast<int>(lines.size()), static_cast<int>(lines.front().size()), resolution});
        for (std::size_t r = 0; r < lines.size(); ++r) {
            if (lines[r].size() != lines.front().size()) throw Error("ragged map snapshot");
            for (std::size_t c = 0; c < lines[r].size(); ++c) {
                const char ch = lines[r][c];
                const CellState s = ch == '.' ? CellState::Free : ch == '#' ? CellState::Occupied : CellState::Unknown;
                if (ch != '.' && ch != '#' && ch != '?') throw Error("bad snapshot character");
                map.set({static_cast<int>(r), static_cast<int>(c)}, s);
            }
        }
        return map;
    }

    friend bool operator==(const LocalMap&, const LocalMap&) = default;

private:
    GridGeometry geo_;
    Cell frame_;
    Grid<CellState> cells_;
};

/// Marks every beam's traversed cells free and its struck cell occupied.
/// MaxRange beams clear cells entered before the sensor radius.
inline void integrate_scan(LocalMap& map, const Pose& pose, const LidarScan& scan) {
    if (std::abs(scan.resolution - map.resolution()) > 1e-12) throw FrameMismatch("scan and map resolutions differ");
    if (!(scan.origin == pose)) throw FrameMismatch("scan origin does not match the pose");

    const GridGeometry& geo = map.geometry();
    const Vec2 origin = pose.position();
    map.mark_free(geo.cell_of(origin));
    constexpr double eps = 1e-9;
    for (const Beam& beam : scan.beams) {
        if (!beam.hit) {
            traverse_ray(geo, origin, beam.angle, beam.range, [&](Cell c, double t) {
                if (t >= beam.range && t > 0.0) return false;
                map.mark_free(c);
                return true;
            });
            continue;
        }
        traverse_ray(geo, origin, beam.angle, beam.range + eps, [&](Cell c, double) {
            if (c == beam.cell) {
                map.mark_occupied(c);
                return false;
            }
            map.mark_free(c);
            return true;
        });
    }
}

/// Free cell with at least one 4-neighbour still unknown.
inline bool is_frontier_cell(const LocalMap& map, Cell c) {
    if (!map.is_free(c)) return false;
    static constexpr std::array<Cell, 4> n4{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
    for (Cell d : n4) {
        if (map.is_unknown({c.row + d.row, c.col + d.col})) return true;
    }
    return false;
}

using FrontierCluster = std::vector<Cell>;

/// Maximal 8-connected groups of frontier cells, ordered by (min row, min col).
/// Cells inside each cluster are row-major.
inline std::vector<FrontierCluster> detect_frontiers(const LocalMap& map) {
    const GridGeometry& geo = map.geometry();
    Grid<unsigned char> is_frontier(geo.rows, geo.cols, 0);
    for (int r = 0; r < geo.rows; ++r) {
        for (int c = 0; c < geo.cols; ++c) {
            if (is_frontier_cell(map, {r, c})) is_frontier[{r, c}] = 1;
        }
    }

    Grid<unsigned char> seen(geo.rows, geo.cols, 0);
    std::vector<FrontierCluster> clusters;
    for (int r = 0; r < geo.rows; ++r) {
        for (int c = 0; c < geo.cols; ++c) {
            if (!is_frontier[{r, c}] || seen[{r, c}]) continue;
            FrontierCluster cluster;
            std::deque<Cell> queue{{r, c}};
            seen[{r, c}] = 1;
            while (!queue.empty()) {
                const Cell cur = queue.front();
                queue.pop_front();
                cluster.push_back(cur);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const Cell n{cur.row + dr, cur.col + dc};
                        if (!geo.contains(n) || !is_frontier[n] || seen[n]) continue;
                        seen[n] = 1;
                        queue.push_back(n);
                    }
                }
            }
            std::sort(cluster.begin(), cluster.end());
            clusters.push_back(std::move(cluster));
        }
    }

    auto key = [](const FrontierCluster& cl) {
        int min_row = cl.front().row;
        int min_col = cl.front().col;
        for (Cell c : cl) {
            min_row = std::min(min_row, c.row);
            min_col = std::min(min_col, c.col);
        }
        return std::array<int, 4>{min_row, min_col, cl.front().row, cl.front().col};
    };
    std::stable_sort(clusters.begin(), clusters.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return clusters;
}

struct Frontier {
    int id = 0;
    std::vector<Cell> cells;
    Cell center;
    std::array<Cell, 3> viewpoints{};  // center, low extreme, high extreme along the principal axis
};

/// Unit principal axis of a set of cells in (row, col) coordinates. Equal
/// eigenvalues resolve to the row axis.
inline Vec2 principal_axis(const std::vector<Cell>& cells) {
    double mr = 0.0;
    double mc = 0.0;
    for (Cell c : cells) {
        mr += c.row;
        mc += c.col;
    }
    const double n = static_cast<double>(cells.size());
    mr /= n;
    mc /= n;
    double srr = 0.0;
    double scc = 0.0;
    double src = 0.0;
    for (Cell c : cells) {
        srr += (c.row - mr) * (c.row - mr);
        scc += (c.col - mc) * (c.col - mc);
        src += (c.row - mr) * (c.col - mc);
    }
    srr /= n;
    scc /= n;
    src /= n;

    constexpr double tol = 1e-12;
    if (std::abs(src) <= tol) {
        if (scc > srr + tol) return {0.0, 1.0};
        return {1.0, 0.0};
    }
    const double half_diff = 0.5 * (srr - scc);
    const double lambda = 0.5 * (srr + scc) + std::sqrt(half_diff * half_diff + src * src);
    // x holds the row component, y the column component.
    Vec2 v{lambda - scc, src};
    const double len = v.norm();
    v = (1.0 / len) * v;
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = (-1.0) * v;
    return v;
}

namespace detail {

inline double project(Cell c, Vec2 axis) { return c.row * axis.x + c.col * axis.y; }

inline std::vector<std::vector<Cell>> connected_parts(const std::vector<Cell>& cells) {
    std::vector<std::vector<Cell>> parts;
    std::vector<char> used(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (used[i]) continue;
        std::vector<Cell> part{cells[i]};
        used[i] = 1;
        for (std::size_t head = 0; head < part.size(); ++head) {
            for (std::size_t j = 0; j < cells.size(); ++j) {
                if (used[j]) continue;
                if (std::abs(cells[j].row - part[head].row) <= 1 && std::abs(cells[j].col - part[head].col) <= 1) {
                    used[j] = 1;
                    part.push_back(cells[j]);
                }
            }
        }
        std::sort(part.begin(), part.end());
        parts.push_back(std::move(part));
    }
    return parts;
}

inline Frontier make_frontier(std::vector<Cell> cells, Vec2 axis) {
    Frontier f;
    std::sort(cells.begin(), cells.end());
    double mr = 0.0;
    double mc = 0.0;
    for (Cell c : cells) {
        mr += c.row;
        mc += c.col;
    }
    mr /= static_cast<double>(cells.size());
    mc /= static_cast<double>(cells.size());

    Cell lo = cells.front();
    Cell hi = cells.front();
    Cell mid = cells.front();
    double best_mid = std::numeric_limits<double>::infinity();
    for (Cell c : cells) {
        const double p = project(c, axis);
        if (p < project(lo, axis)) lo = c;
        if (p > project(hi, axis)) hi = c;
        const double d = (c.row - mr) * (c.row - mr) + (c.col - mc) * (c.col - mc);
        if (d < best_mid) {
            best_mid = d;
            mid = c;
        }
    }
    f.cells = std::move(cells);
    f.center = mid;
    f.viewpoints = {mid, lo, hi};
    return f;
}

}  // namespace detail

/// Projected extent (m) of a cell set along `axis`.
inline double projected_extent(const std::vector<Cell>& cells, Vec2 axis, double resolution) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Cell c : cells) {
        const double p = detail::project(c, axis);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    return (hi - lo) * resolution;
}

/// Cuts a cluster longer than `max_extent` into ceil(extent / max_extent)
/// equal slabs along its principal axis; a slab that is not 8-connected is
/// split further into its components. Ids are left at 0 for the caller.
inline std::vector<Frontier> split_frontier(const FrontierCluster& cluster, double max_extent, double resolution) {
    if (cluster.empty()) return {};
    const Vec2 axis = principal_axis(cluster);
    const double extent = projected_extent(cluster, axis, resolution);
    if (extent <= max_extent + 1e-9 || max_extent <= 0.0) return {detail::make_frontier(cluster, axis)};

    const auto pieces = static_cast<std::size_t>(std::ceil(extent / max_extent - 1e-9));
    double lo = std::numeric_limits<double>::infinity();
    for (Cell c : cluster) lo = std::min(lo, detail::project(c, axis));
    const double slab = extent / resolution / static_cast<double>(pieces);

    std::vector<std::vector<Cell>> slabs(pieces);
    for (Cell c : cluster) {
        auto idx = static_cast<std::size_t>(std::floor((detail::project(c, axis) - lo) / slab + 1e-9));
        slabs[std::min(idx, pieces - 1)].push_back(c);
    }

    std::vector<Frontier> out;
    for (auto& s : slabs) {
        if (s.empty()) continue;
        for (auto& part : detail::connected_parts(s)) out.push_back(detail::make_frontier(std::move(part), axis));
    }
    return out;
}

/// Detects, splits and numbers frontiers in one pass.
inline std::vector<Frontier> extract_frontiers(const LocalMap& map, double max_extent) {
    std::vector<Frontier> out;
    for (const auto& cluster : detect_frontiers(map)) {
        for (auto& f : split_frontier(cluster, max_extent, map.resolution())) {
            f.id = static_cast<int>(out.size());
            out.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace wiserx
