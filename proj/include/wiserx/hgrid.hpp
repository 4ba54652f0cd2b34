#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wiserx/common.hpp"

namespace wiserx {

struct Estimate {
    RobotId robot_id = 0;
    Tick tick = 0;
    Vec2 position;
    double trace_pos = 0.0;
    friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct QueryStats {
    std::size_t nodes_visited = 0;
};

/// Quadtree over the environment whose leaves are sensor-radius squares.
/// Holds every position estimate a robot has recorded (its own positions and
/// its neighbours' filtered estimates) together with per-robot visit counts.
/// Each robot's activity flag gates its estimates in queries and coverage.
class Hgrid {
public:
    Hgrid(Rect bounds, double cell_size, RobotId owner)
        : bounds_(bounds), cell_size_(cell_size), owner_(owner) {
        if (!(cell_size > 0.0)) throw Error("hgrid cell size must be positive");
        const double extent = std::max(bounds.width(), bounds.height());
        leaves_x_ = std::max(1, static_cast<int>(std::ceil(bounds.width() / cell_size - 1e-9)));
        leaves_y_ = std::max(1, static_cast<int>(std::ceil(bounds.height() / cell_size - 1e-9)));
        const double ratio = extent / cell_size;
        depth_ = ratio <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(ratio) - 1e-12));
        leaf_nodes_.assign(static_cast<std::size_t>(leaves_x_) * static_cast<std::size_t>(leaves_y_), nullptr);
        root_ = std::make_unique<Node>();
    }

    Hgrid(const Hgrid&) = delete;
    Hgrid& operator=(const Hgrid&) = delete;
    Hgrid(Hgrid&&) noexcept = default;
    Hgrid& operator=(Hgrid&&) noexcept = default;

    [[nodiscard]] const Rect& bounds() const { return bounds_; }
    [[nodiscard]] double cell_size() const { return cell_size_; }
    [[nodiscard]] int depth() const { return depth_; }
    [[nodiscard]] RobotId owner() const { return owner_; }
    [[nodiscard]] std::size_t leaf_count() const { return leaf_nodes_.size(); }
    [[nodiscard]] std::size_t size() const { return size_; }

    /// Leaf (ix, iy) holding `p` after clamping into bounds.
    [[nodiscard]] std::array<int, 2> leaf_of(Vec2 p) const {
        const Vec2 q = clamp(p);
        int ix = static_cast<int>(std::floor((q.x - bounds_.min_x) / cell_size_));
        int iy = static_cast<int>(std::floor((q.y - bounds_.min_y) / cell_size_));
        ix = std::clamp(ix, 0, leaves_x_ - 1);
        iy = std::clamp(iy, 0, leaves_y_ - 1);
        return {ix, iy};
    }
    [[nodiscard]] std::size_t leaf_index(Vec2 p) const {
        const auto [ix, iy] = leaf_of(p);
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(leaves_x_) + static_cast<std::size_t>(ix);
    }

    void insert(RobotId robot, Vec2 position, double trace_pos, Tick tick) {
        const Vec2 p = clamp(position);
        const auto [ix, iy] = leaf_of(p);
        Node* node = root_.get();
        for (int level = depth_ - 1; level >= 0; --level) {
            const int child = (((iy >> level) & 1) << 1) | ((ix >> level) & 1);
            if (!node->children[static_cast<std::size_t>(child)]) node->children[static_cast<std::size_t>(child)] = std::make_unique<Node>();
            node = node->children[static_cast<std::size_t>(child)].get();
        }
        const Estimate e{robot, tick, p, trace_pos};
        node->estimates.push_back(e);
        ++count_ref(node, slot(robot));
        leaf_nodes_[static_cast<std::size_t>(iy) * static_cast<std::size_t>(leaves_x_) + static_cast<std::size_t>(ix)] = node;
        ++size_;

        auto& last = latest_[slot(robot)];
        if (!last || last->tick <= tick) last = e;
    }

    /// Estimates within `radius` of `point` (inclusive) from active robots,
    /// sorted by (tick, robot id). Only nodes touching the disc are visited.
    [[nodiscard]] std::vector<Estimate> query_near(Vec2 point, double radius, QueryStats* stats = nullptr) const {
        std::vector<Estimate> out;
        QueryStats local;
        const double side = cell_size_ * static_cast<double>(1 << depth_);
        visit(root_.get(), bounds_.min_x, bounds_.min_y, side, point, radius, out, local);
        if (stats) *stats = local;
        std::stable_sort(out.begin(), out.end(), [](const Estimate& a, const Estimate& b) {
            return a.tick != b.tick ? a.tick < b.tick : a.robot_id < b.robot_id;
        });
        return out;
    }

    /// Flips one flag; stored estimates are untouched.
    void set_active(RobotId robot, bool active) { active_[slot(robot)] = active ? 1 : 0; }
    [[nodiscard]] bool is_active(RobotId robot) const {
        const auto s = static_cast<std::size_t>(robot);
        return s >= active_.size() || active_[s] != 0;
    }

    /// Fraction of leaves whose visits by the owner plus active robots reach k.
    [[nodiscard]] double coverage_fraction(int k) const {
        std::size_t filled = 0;
        for (const Node* leaf : leaf_nodes_) {
            if (!leaf) continue;
            long total = 0;
            for (std::size_t r = 0; r < leaf->counts.size(); ++r) {
                if (static_cast<RobotId>(r) == owner_ || is_active(static_cast<RobotId>(r))) total += leaf->counts[r];
            }
            if (total >= k) ++filled;
        }
        return static_cast<double>(filled) / static_cast<double>(leaf_nodes_.size());
    }

    [[nodiscard]] int visit_count(std::size_t leaf, RobotId robot) const {
        const Node* n = leaf_nodes_.at(leaf);
        const auto s = static_cast<std::size_t>(robot);
        return n && s < n->counts.size() ? n->counts[s] : 0;
    }

    /// Most recent estimate of each active robot other than the owner.
    [[nodiscard]] std::vector<Vec2> latest_neighbor_positions() const {
        std::vector<Vec2> out;
        for (std::size_t r = 0; r < latest_.size(); ++r) {
            const auto id = static_cast<RobotId>(r);
            if (id != owner_ && latest_[r] && is_active(id)) out.push_back(latest_[r]->position);
        }
        return out;
    }

    /// Every stored estimate, active or not, in leaf order then insertion order.
    [[nodiscard]] std::vector<Estimate> all_estimates() const {
        std::vector<Estimate> out;
        for (const Node* leaf : leaf_nodes_) {
            if (leaf) out.insert(out.end(), leaf->estimates.begin(), leaf->estimates.end());
        }
        return out;
    }

    /// CSV dump: robot_id,tick,x,y,trace_pos,leaf_index.
    [[nodiscard]] std::string dump_csv() const {
        std::ostringstream os;
        os.precision(9);
        os << "robot_id,tick,x,y,trace_pos,leaf_index\n";
        for (std::size_t i = 0; i < leaf_nodes_.size(); ++i) {
            if (!leaf_nodes_[i]) continue;
            for (const Estimate& e : leaf_nodes_[i]->estimates) {
                os << e.robot_id << ',' << e.tick << ',' << e.position.x << ',' << e.position.y << ',' << e.trace_pos << ','
                   << i << '\n';
            }
        }
        return os.str();
    }

private:
    struct Node {
        std::array<std::unique_ptr<Node>, 4> children;
        std::vector<Estimate> estimates;
        std::vector<int> counts;
    };

    [[nodiscard]] Vec2 clamp(Vec2 p) const {
        return {std::clamp(p.x, bounds_.min_x, bounds_.max_x), std::clamp(p.y, bounds_.min_y, bounds_.max_y)};
    }

    std::size_t slot(RobotId robot) {
        if (robot < 0) throw Error("robot ids must be non-negative");
        const auto s = static_cast<std::size_t>(robot);
        if (active_.size() <= s) active_.resize(s + 1, 1);
        if (latest_.size() <= s) latest_.resize(s + 1);
        return s;
    }
    int& count_ref(Node* n, std::size_t s) {
        if (n->counts.size() <= s) n->counts.resize(s + 1, 0);
        return n->counts[s];
    }

    void visit(const Node* node, double x0, double y0, double side, Vec2 p, double radius, std::vector<Estimate>& out,
               QueryStats& stats) const {
        if (!node) return;
        const double cx = std::clamp(p.x, x0, x0 + side);
        const double cy = std::clamp(p.y, y0, y0 + side);
        const double dx = p.x - cx;
        const double dy = p.y - cy;
        if (dx * dx + dy * dy > radius * radius) return;
        ++stats.nodes_visited;
        const double r2 = radius * radius;
        for (const Estimate& e : node->estimates) {
            const double ex = e.position.x - p.x;
            const double ey = e.position.y - p.y;
            if (ex * ex + ey * ey <= r2 && is_active(e.robot_id)) out.push_back(e);
        }
        const double half = side / 2.0;
        for (std::size_t c = 0; c < 4; ++c) {
            const double nx = x0 + ((c & 1U) ? half : 0.0);
            const double ny = y0 + ((c & 2U) ? half : 0.0);
            visit(node->children[c].get(), nx, ny, half, p, radius, out, stats);
        }
    }

    Rect bounds_;
    double cell_size_ = 1.0;
    RobotId owner_ = 0;
    int depth_ = 0;
    int leaves_x_ = 1;
    int leaves_y_ = 1;
    std::unique_ptr<Node> root_;
    std::vector<Node*> leaf_nodes_;
    std::vector<char> active_;
    std::vector<std::optional<Estimate>> latest_;
    std::size_t size_ = 0;
};

}  // namespace wiserx
