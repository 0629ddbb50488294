#include "rssvar/propagation.hpp"

#include <cmath>

#include "rssvar/error.hpp"

namespace rssvar {

namespace {

void reject_near_node(LinkGeometry const& link, Vec3 x)
{
    if (distance(link.tx(), x) <= kPositionTolerance || distance(link.rx(), x) <= kPositionTolerance) {
        throw Error(ErrorKind::singular_position, "scatterer coincides with a node");
    }
}

}  // namespace

void PropagationParams::validate() const
{
    if (!(c_s > 0.0 && std::isfinite(c_s)) || !(c_r > 0.0 && std::isfinite(c_r))) {
        throw Error(ErrorKind::invalid_argument, "c_s and c_r must be positive and finite");
    }
    if (!(n_p >= 1.0 && std::isfinite(n_p))) {
        throw Error(ErrorKind::invalid_argument, "path loss exponent must be >= 1");
    }
}

double power_scatter(LinkGeometry const& link, Vec3 x, PropagationParams const& params)
{
    reject_near_node(link, x);
    Vec3 const dt = link.tx() - x;
    Vec3 const dr = link.rx() - x;
    return params.c_s / (dot(dt, dt) * dot(dr, dr));
}

double power_reflect(LinkGeometry const& link, Vec3 x, PropagationParams const& params)
{
    reject_near_node(link, x);
    double const path = distance(link.tx(), x) + distance(link.rx(), x);
    return params.c_r / std::pow(path, params.n_p);
}

double cassini_level(LinkGeometry const& link, Vec3 x)
{
    return distance(link.tx(), x) * distance(link.rx(), x);
}

PowerKernel scatter_kernel(LinkGeometry const& link, PropagationParams const& params)
{
    return [link, params](Vec3 const& x) { return power_scatter(link, x, params); };
}

PowerKernel reflect_kernel(LinkGeometry const& link, PropagationParams const& params)
{
    return [link, params](Vec3 const& x) { return power_reflect(link, x, params); };
}

}  // namespace rssvar
