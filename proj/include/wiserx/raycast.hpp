#pragma once

#include <cmath>
#include <limits>

#include "wiserx/common.hpp"

namespace wiserx {

/// Amanatides-Woo grid traversal. Calls `visit(cell, t_enter)` for every cell
/// the ray from `origin` along `angle` enters, in order, while
/// t_enter <= max_t. The origin cell is visited with t_enter = 0. A visitor
/// returning false stops the walk. On an exact corner crossing the x step is
/// taken first, so a diagonal ray cannot slip between two touching cells.
template <class Visitor>
void traverse_ray(const GridGeometry& geo, Vec2 origin, double angle, double max_t, Visitor&& visit) {
    const double res = geo.resolution;
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    Cell cell = geo.cell_of(origin);

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double eps = 1e-12;
    const int step_c = dx > eps ? 1 : (dx < -eps ? -1 : 0);
    const int step_r = dy > eps ? 1 : (dy < -eps ? -1 : 0);

    double t_max_x = inf;
    double t_delta_x = inf;
    if (step_c != 0) {
        const double boundary = (step_c > 0 ? cell.col + 1 : cell.col) * res;
        t_max_x = (boundary - origin.x) / dx;
        t_delta_x = res / std::abs(dx);
    }
    double t_max_y = inf;
    double t_delta_y = inf;
    if (step_r != 0) {
        const double boundary = (step_r > 0 ? cell.row + 1 : cell.row) * res;
        t_max_y = (boundary - origin.y) / dy;
        t_delta_y = res / std::abs(dy);
    }

    double t_enter = 0.0;
    while (t_enter <= max_t) {
        if (!geo.contains(cell)) return;
        if (!visit(cell, t_enter)) return;
        if (t_max_x <= t_max_y) {
            t_enter = t_max_x;
            t_max_x += t_delta_x;
            cell.col += step_c;
        } else {
            t_enter = t_max_y;
            t_max_y += t_delta_y;
            cell.row += step_r;
        }
        if (t_enter == inf) return;
    }
}

}  // namespace wiserx
