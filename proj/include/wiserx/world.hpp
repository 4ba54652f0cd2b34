#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wiserx/common.hpp"

namespace wiserx {

enum class Truth : unsigned char { Free, Occupied };

/// Immutable ground-truth occupancy of a bounded 2D environment.
class GroundTruthMap {
public:
    GroundTruthMap(Grid<Truth> cells, double resolution) : cells_(std::move(cells)), resolution_(resolution) {
        for (Truth t : cells_.data()) {
            if (t == Truth::Free) ++free_count_;
        }
    }

    [[nodiscard]] int rows() const { return cells_.rows(); }
    [[nodiscard]] int cols() const { return cells_.cols(); }
    [[nodiscard]] double resolution() const { return resolution_; }
    [[nodiscard]] GridGeometry geometry() const { return {rows(), cols(), resolution_}; }
    [[nodiscard]] Rect bounds() const { return {0.0, 0.0, cols() * resolution_, rows() * resolution_}; }
    [[nodiscard]] std::size_t free_count() const { return free_count_; }

    [[nodiscard]] bool contains(Cell c) const { return cells_.contains(c); }
    /// Out-of-range cells read as occupied.
    [[nodiscard]] bool occupied(Cell c) const { return !cells_.contains(c) || cells_[c] == Truth::Occupied; }
    [[nodiscard]] bool free(Cell c) const { return !occupied(c); }
    [[nodiscard]] bool free_at(Vec2 p) const { return free(geometry().cell_of(p)); }

    [[nodiscard]] const Grid<Truth>& cells() const { return cells_; }

    [[nodiscard]] std::string to_text() const {
        std::string out;
        out.reserve(static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols() + 1));
        for (int r = 0; r < rows(); ++r) {
            for (int c = 0; c < cols(); ++c) out.push_back(cells_[{r, c}] == Truth::Free ? '.' : '#');
            out.push_back('\n');
        }
        return out;
    }

    friend bool operator==(const GroundTruthMap&, const GroundTruthMap&) = default;

private:
    Grid<Truth> cells_;
    double resolution_ = 0.25;
    std::size_t free_count_ = 0;
};

inline constexpr double default_resolution = 0.25;

/// Parses an ASCII grid: '#' occupied, '.' free, one row per line, uniform
/// row length. Blank trailing lines and '\r' are ignored.
inline GroundTruthMap load_environment(std::string_view text, double resolution = default_resolution) {
    if (!(resolution > 0.0)) throw MalformedMap("resolution must be positive");

    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw MalformedMap("map is empty");

    const std::size_t width = lines.front().size();
    if (width == 0) throw MalformedMap("map row 0 is empty");

    Grid<Truth> cells(static_cast<int>(lines.size()), static_cast<int>(width), Truth::Occupied);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != width) {
            throw MalformedMap("ragged map: row " + std::to_string(r) + " has " + std::to_string(lines[r].size()) +
                               " cells, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            const char ch = lines[r][c];
            Cell cell{static_cast<int>(r), static_cast<int>(c)};
            if (ch == '#') {
                cells[cell] = Truth::Occupied;
            } else if (ch == '.') {
                cells[cell] = Truth::Free;
            } else {
                throw MalformedMap("bad map character '" + std::string(1, ch) + "' at row " + std::to_string(r) +
                                   ", col " + std::to_string(c));
            }
        }
    }

    for (int r = 0; r < cells.rows(); ++r) {
        for (int c = 0; c < cells.cols(); ++c) {
            const bool border = r == 0 || c == 0 || r == cells.rows() - 1 || c == cells.cols() - 1;
            if (border && cells[{r, c}] == Truth::Free) {
                throw UnboundedMap("border cell (" + std::to_string(r) + ", " + std::to_string(c) + ") is free");
            }
        }
    }

    GroundTruthMap map(std::move(cells), resolution);
    if (map.free_count() == 0) throw MalformedMap("map has no free cells");
    return map;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline GroundTruthMap load_environment_file(const std::string& path, double resolution = default_resolution) {
    return load_environment(read_text_file(path), resolution);
}

}  // namespace wiserx
