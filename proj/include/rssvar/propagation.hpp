#pragma once

#include <functional>

#include "rssvar/geometry.hpp"

namespace rssvar {

struct PropagationParams {
    double c_s = 1.0;  // scattering constant
    double c_r = 1.0;  // reflection constant
    double n_p = 3.0;  // path loss exponent for reflected paths

    void validate() const;
};

/// Received power from a single bounce off a scatterer located at x.
using PowerKernel = std::function<double(Vec3 const&)>;

/// Bistatic scattering power c_s / (|x_t - x|^2 |x_r - x|^2).
double power_scatter(LinkGeometry const& link, Vec3 x, PropagationParams const& params);

/// Reflected power c_r / (|x_t - x| + |x_r - x|)^n_p.
double power_reflect(LinkGeometry const& link, Vec3 x, PropagationParams const& params);

/// |x_t - x| |x_r - x|; its level sets are Cassini ovals with the nodes as foci.
double cassini_level(LinkGeometry const& link, Vec3 x);

PowerKernel scatter_kernel(LinkGeometry const& link, PropagationParams const& params);
PowerKernel reflect_kernel(LinkGeometry const& link, PropagationParams const& params);

}  // namespace rssvar
