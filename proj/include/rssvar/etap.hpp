#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rssvar/geometry.hpp"
#include "rssvar/grid.hpp"
#include "rssvar/propagation.hpp"
#include "rssvar/quadrature.hpp"

namespace rssvar {

struct Scenario {
    LinkGeometry link;
    Person person;
    PropagationParams params;
    double eta = 1.0;  // scatterer density [1/m^2]

    void validate() const;
    Scenario with_person_at(Vec2 position) const { return {link, Person(position, person.diameter()), params, eta}; }
};

/// Regions where the shadow-line approximations are known to break down.
enum EtapFlag : std::uint8_t {
    kNearCollinearFar = 1u << 0,      // beyond a node on the TX-RX line: the two shadows overlap
    kNearCollinearBetween = 1u << 1,  // between the nodes: the median ray grazes the other node
    kNearNode = 1u << 2,              // person closer to a node than its own diameter
};

/// Angular margin (rad) from 0 or pi at which the collinear flags are raised.
inline constexpr double kCollinearMargin = 0.05;

std::string flags_to_string(std::uint8_t flags);

struct EtapResult {
    double value = 0.0;
    double q_t = 0.0;  // contribution of the shadow cast away from the TX
    double q_r = 0.0;  // contribution of the shadow cast away from the RX
    std::uint8_t flags = 0;
};

std::uint8_t etap_flags(Scenario const& scn, GeometryScalars const& g);

/// Shadow line integral of an arbitrary power kernel along both median rays.
EtapResult etap_generic(Scenario const& scn, PowerKernel const& kernel, QuadratureSettings const& quad = {});

/// Closed-form scattering ETAP, with per-ray parts reported separately.
EtapResult etap_scatter_closed_form(Scenario const& scn);

/// Reflection ETAP by quadrature. Without an alpha cap the integral only
/// converges for n_p > 2 (DivergentTail otherwise).
EtapResult etap_reflect(Scenario const& scn, QuadratureSettings const& quad = {});

struct Mechanism {
    enum class Kind { scatter, reflect, blend };
    Kind kind = Kind::scatter;
    double weight = 1.0;  // scatter share for blend: w * scatter + (1 - w) * reflect

    static Mechanism scatter() { return {Kind::scatter, 1.0}; }
    static Mechanism reflect() { return {Kind::reflect, 0.0}; }
    static Mechanism blend(double w);
    static Mechanism parse(std::string_view name, double weight = 0.5);
    std::string name() const;
};

EtapResult etap(Scenario const& scn, Mechanism const& mechanism, QuadratureSettings const& quad = {});

struct EtapSurface {
    GridSpec grid;
    std::vector<EtapResult> cells;
    std::vector<std::uint8_t> hole;  // evaluation failed; reason in hole_reason
    std::vector<std::string> hole_reason;
    Mechanism mechanism;

    std::size_t hole_count() const;
    std::size_t flagged_count() const;
    /// Raw ETAP; cells are valid when neither a hole nor flagged.
    SurfaceGrid linear() const;
    /// 10 log10(value / max) with the max taken over valid cells.
    SurfaceGrid db() const;
};

/// ETAP at every cell center of `grid`, with the person diameter, link and
/// propagation parameters taken from `scn`. Cells that fail become holes.
EtapSurface etap_surface(Scenario const& scn, GridSpec const& grid, Mechanism const& mechanism,
                         QuadratureSettings const& quad = {}, unsigned workers = 1);

}  // namespace rssvar
