#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wiserx {

/// Base for every error the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors in user-supplied maps or scenario files (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

class MalformedMap : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class UnboundedMap : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidStartPose : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ThresholdOrder : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class BadNoise : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class PoseInOccupied : public Error {
public:
    using Error::Error;
};

class FrameMismatch : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class SingularInnovation : public Error {
public:
    using Error::Error;
};

class InactiveTrack : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;

    [[nodiscard]] double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    [[nodiscard]] Vec2 position() const { return {x, y}; }
    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Grid index. Row grows with y, column grows with x.
struct Cell {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

/// Row-major dense 2D grid.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] bool contains(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows_ && c.col < cols_; }

    T& operator[](Cell c) { return data_[index(c)]; }
    const T& operator[](Cell c) const { return data_[index(c)]; }

    [[nodiscard]] std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c.col);
    }
    [[nodiscard]] Cell cell_at(std::size_t i) const {
        return {static_cast<int>(i / static_cast<std::size_t>(cols_)), static_cast<int>(i % static_cast<std::size_t>(cols_))};
    }

    [[nodiscard]] const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

/// Metric frame shared by every grid in a scenario: cell (r, c) spans
/// x in [c*res, (c+1)*res) and y in [r*res, (r+1)*res).
struct GridGeometry {
    int rows = 0;
    int cols = 0;
    double resolution = 0.25;

    [[nodiscard]] Vec2 center(Cell c) const { return {(c.col + 0.5) * resolution, (c.row + 0.5) * resolution}; }
    [[nodiscard]] Cell cell_of(Vec2 p) const {
        return {static_cast<int>(std::floor(p.y / resolution)), static_cast<int>(std::floor(p.x / resolution))};
    }
    [[nodiscard]] bool contains(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
    [[nodiscard]] double width() const { return cols * resolution; }
    [[nodiscard]] double height() const { return rows * resolution; }

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    [[nodiscard]] double width() const { return max_x - min_x; }
    [[nodiscard]] double height() const { return max_y - min_y; }
    friend bool operator==(const Rect&, const Rect&) = default;
};

using RobotId = int;
using Tick = std::int64_t;

}  // namespace wiserx
