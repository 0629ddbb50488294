#include "rssvar/grid.hpp"

#include <cmath>

#include "rssvar/error.hpp"

namespace rssvar {

namespace {

std::size_t cells_along(double lo, double hi, double step)
{
    double const n = (hi - lo) / step;
    double const rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-6 * std::max(1.0, rounded)) {
        throw Error(ErrorKind::invalid_argument, "grid extent is not a whole number of steps");
    }
    return static_cast<std::size_t>(rounded);
}

}  // namespace

void GridSpec::validate() const
{
    if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_min) || !std::isfinite(y_max)) {
        throw Error(ErrorKind::invalid_argument, "grid bounds must be finite and step > 0");
    }
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw Error(ErrorKind::invalid_argument, "grid bounds must satisfy min < max");
    }
    if (nx() < 2 || ny() < 2) {
        throw Error(ErrorKind::invalid_argument, "grid needs at least 2x2 cells");
    }
}

std::size_t GridSpec::nx() const { return cells_along(x_min, x_max, step); }
std::size_t GridSpec::ny() const { return cells_along(y_min, y_max, step); }

Vec2 GridSpec::center(std::size_t index) const
{
    std::size_t const n = nx();
    double const ix = static_cast<double>(index % n);
    double const iy = static_cast<double>(index / n);
    return {x_min + (ix + 0.5) * step, y_min + (iy + 0.5) * step};
}

std::optional<std::size_t> GridSpec::locate(Vec2 p) const
{
    if (!(p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max)) {
        return std::nullopt;
    }
    std::size_t const n_x = nx();
    std::size_t const n_y = ny();
    auto const ix = std::min(static_cast<std::size_t>(std::floor((p.x - x_min) / step)), n_x - 1);
    auto const iy = std::min(static_cast<std::size_t>(std::floor((p.y - y_min) / step)), n_y - 1);
    return iy * n_x + ix;
}

void to_json(nlohmann::json& j, GridSpec const& g)
{
    j = {{"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min}, {"y_max", g.y_max}, {"step", g.step}};
}

void from_json(nlohmann::json const& j, GridSpec& g)
{
    g.x_min = j.value("x_min", g.x_min);
    g.x_max = j.value("x_max", g.x_max);
    g.y_min = j.value("y_min", g.y_min);
    g.y_max = j.value("y_max", g.y_max);
    g.step = j.value("step", g.step);
}

SurfaceGrid SurfaceGrid::filled(GridSpec const& spec, double value, bool valid)
{
    spec.validate();
    SurfaceGrid s;
    s.spec = spec;
    s.values.assign(spec.cell_count(), value);
    s.valid.assign(spec.cell_count(), valid ? 1 : 0);
    return s;
}

}  // namespace rssvar
