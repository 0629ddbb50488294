#include "rssvar/etap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rssvar/error.hpp"
#include "rssvar/parallel.hpp"
#include "rssvar/surface.hpp"

namespace rssvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// (pi - theta) / sin(theta), finite everywhere except theta -> 0.
double angle_ratio(GeometryScalars const& g)
{
    double const eps = std::numbers::pi - g.theta;
    if (g.sin_theta < 1e-6) {
        if (g.cos_theta > 0.0) {
            if (g.sin_theta == 0.0) {
                throw Error(ErrorKind::singular_position,
                            "person is on the TX-RX segment; the median ray passes through the other node");
            }
            return eps / g.sin_theta;
        }
        return 1.0 + eps * eps / 6.0;
    }
    return eps / g.sin_theta;
}

template <typename Integrand>
double integrate_median_ray(Integrand&& integrand, QuadratureSettings const& quad)
{
    return integrate_ray(std::function<double(double)>(std::forward<Integrand>(integrand)), quad).value;
}

}  // namespace

void Scenario::validate() const
{
    params.validate();
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw Error(ErrorKind::invalid_argument, "scatterer density must be positive");
    }
}

std::string flags_to_string(std::uint8_t flags)
{
    std::string out;
    auto add = [&out](char const* name) {
        if (!out.empty()) {
            out += '|';
        }
        out += name;
    };
    if (flags & kNearCollinearFar) add("NearCollinearFar");
    if (flags & kNearCollinearBetween) add("NearCollinearBetween");
    if (flags & kNearNode) add("NearNode");
    return out;
}

std::uint8_t etap_flags(Scenario const& scn, GeometryScalars const& g)
{
    std::uint8_t flags = 0;
    if (std::numbers::pi - g.theta < kCollinearMargin) {
        flags |= kNearCollinearFar;
    }
    if (g.theta < kCollinearMargin) {
        flags |= kNearCollinearBetween;
    }
    if (std::min(g.a, g.b) < scn.person.diameter()) {
        flags |= kNearNode;
    }
    return flags;
}

EtapResult etap_generic(Scenario const& scn, PowerKernel const& kernel, QuadratureSettings const& quad)
{
    scn.validate();
    auto const g = geometry_scalars(scn.link, scn.person);
    Vec3 const xo = scn.person.center();
    double const scale = scn.eta * scn.person.diameter();

    auto along = [&](Vec3 apex, double dist) {
        Vec3 const dir = (1.0 / dist) * (xo - apex);
        return integrate_median_ray(
            [&](double alpha) { return scale * (alpha + dist) / dist * kernel(xo + alpha * dir); }, quad);
    };

    EtapResult r;
    r.q_t = along(scn.link.tx(), g.a);
    r.q_r = along(scn.link.rx(), g.b);
    r.value = r.q_t + r.q_r;
    r.flags = etap_flags(scn, g);
    return r;
}

EtapResult etap_scatter_closed_form(Scenario const& scn)
{
    scn.validate();
    auto const g = geometry_scalars(scn.link, scn.person);
    double const d_rt = scn.link.separation();
    double const k = scn.person.diameter() * scn.params.c_s * scn.eta / (d_rt * d_rt);
    double const ratio = angle_ratio(g);
    double const log_ab = std::log(g.a / g.b);

    EtapResult r;
    r.q_t = k * (ratio * (1.0 / g.b + g.cos_theta / g.a) - log_ab / g.a);
    r.q_r = k * (ratio * (1.0 / g.a + g.cos_theta / g.b) + log_ab / g.b);
    r.value = r.q_t + r.q_r;
    r.flags = etap_flags(scn, g);
    return r;
}

EtapResult etap_reflect(Scenario const& scn, QuadratureSettings const& quad)
{
    scn.validate();
    double const n_p = scn.params.n_p;
    if (n_p <= 2.0 && std::isinf(quad.alpha_cap)) {
        std::ostringstream msg;
        msg << "reflection shadow integral diverges for n_p = " << n_p << " <= 2; set a finite alpha cap";
        throw Error(ErrorKind::divergent_tail, msg.str());
    }
    auto const g = geometry_scalars(scn.link, scn.person);
    Vec3 const xo = scn.person.center();
    double const scale = scn.eta * scn.person.diameter() * scn.params.c_r;

    auto along = [&](Vec3 apex, double dist, Vec3 other) {
        Vec3 const dir = (1.0 / dist) * (xo - apex);
        Vec3 const to_other = other - xo;
        return integrate_median_ray(
            [&](double alpha) {
                double const path = dist + alpha + norm(to_other - alpha * dir);
                return scale * (alpha + dist) / dist / std::pow(path, n_p);
            },
            quad);
    };

    EtapResult r;
    r.q_t = along(scn.link.tx(), g.a, scn.link.rx());
    r.q_r = along(scn.link.rx(), g.b, scn.link.tx());
    r.value = r.q_t + r.q_r;
    r.flags = etap_flags(scn, g);
    return r;
}

Mechanism Mechanism::blend(double w)
{
    if (!(w >= 0.0 && w <= 1.0)) {
        throw Error(ErrorKind::invalid_argument, "blend weight must lie in [0, 1]");
    }
    return {Kind::blend, w};
}

Mechanism Mechanism::parse(std::string_view name, double weight)
{
    if (name == "scatter") return scatter();
    if (name == "reflect") return reflect();
    if (name == "blend") return blend(weight);
    throw Error(ErrorKind::invalid_argument, "unknown mechanism '" + std::string(name) + "'");
}

std::string Mechanism::name() const
{
    switch (kind) {
    case Kind::scatter: return "scatter";
    case Kind::reflect: return "reflect";
    case Kind::blend: return "blend";
    }
    return "unknown";
}

EtapResult etap(Scenario const& scn, Mechanism const& mechanism, QuadratureSettings const& quad)
{
    switch (mechanism.kind) {
    case Mechanism::Kind::scatter: return etap_scatter_closed_form(scn);
    case Mechanism::Kind::reflect: return etap_reflect(scn, quad);
    case Mechanism::Kind::blend: break;
    }
    double const w = mechanism.weight;
    if (w == 1.0) {
        return etap_scatter_closed_form(scn);
    }
    if (w == 0.0) {
        return etap_reflect(scn, quad);
    }
    auto const s = etap_scatter_closed_form(scn);
    auto const f = etap_reflect(scn, quad);
    EtapResult r;
    r.q_t = w * s.q_t + (1.0 - w) * f.q_t;
    r.q_r = w * s.q_r + (1.0 - w) * f.q_r;
    r.value = r.q_t + r.q_r;
    r.flags = s.flags | f.flags;
    return r;
}

std::size_t EtapSurface::hole_count() const { return static_cast<std::size_t>(std::count(hole.begin(), hole.end(), 1)); }

std::size_t EtapSurface::flagged_count() const
{
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](EtapResult const& c) { return c.flags != 0; }));
}

SurfaceGrid EtapSurface::linear() const
{
    SurfaceGrid s;
    s.spec = grid;
    s.values.resize(cells.size());
    s.valid.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        s.values[i] = hole[i] ? kNaN : cells[i].value;
        s.valid[i] = !hole[i] && cells[i].flags == 0 ? 1 : 0;
    }
    s.metadata = {{"quantity", "etap"},
                  {"mechanism", mechanism.name()},
                  {"blend_weight", mechanism.weight},
                  {"normalization", "linear"},
                  {"holes", hole_count()},
                  {"flagged", flagged_count()}};
    return s;
}

SurfaceGrid EtapSurface::db() const { return to_db(linear()); }

EtapSurface etap_surface(Scenario const& scn, GridSpec const& grid, Mechanism const& mechanism,
                         QuadratureSettings const& quad, unsigned workers)
{
    grid.validate();
    scn.validate();
    std::size_t const n = grid.cell_count();
    EtapSurface out;
    out.grid = grid;
    out.mechanism = mechanism;
    out.cells.resize(n);
    out.hole.assign(n, 0);
    out.hole_reason.resize(n);
    parallel_for(n, workers, [&](std::size_t i) {
        try {
            out.cells[i] = etap(scn.with_person_at(grid.center(i)), mechanism, quad);
        } catch (Error const& e) {
            out.cells[i] = EtapResult{kNaN, kNaN, kNaN, 0};
            out.hole[i] = 1;
            out.hole_reason[i] = e.what();
        }
    });
    return out;
}

}  // namespace rssvar
