#pragma once

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <vector>

#include "rssvar/geometry.hpp"

namespace rssvar {

/// Rectangular grid of square cells over the scatterer plane. Cell (ix, iy)
/// covers [x_min + ix*step, x_min + (ix+1)*step) x [...); the last cell in
/// each direction also includes its upper edge.
struct GridSpec {
    double x_min = -2.0;
    double x_max = 2.0;
    double y_min = -2.0;
    double y_max = 2.0;
    double step = 0.05;

    void validate() const;
    std::size_t nx() const;
    std::size_t ny() const;
    std::size_t cell_count() const { return nx() * ny(); }
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx() + ix; }
    Vec2 center(std::size_t index) const;
    /// Cell containing p, or nullopt outside the grid.
    std::optional<std::size_t> locate(Vec2 p) const;

    friend bool operator==(GridSpec const&, GridSpec const&) = default;
};

void to_json(nlohmann::json& j, GridSpec const& g);
void from_json(nlohmann::json const& j, GridSpec& g);

/// Row-major (y outer, x inner) per-cell values plus validity.
struct SurfaceGrid {
    GridSpec spec;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    nlohmann::json metadata = nlohmann::json::object();

    static SurfaceGrid filled(GridSpec const& spec, double value, bool valid);
};

}  // namespace rssvar
