#pragma once

// Independent reference computations used by the unit tests. None of these
// call into the library's own integration or geometry helpers.

#include <functional>

#include "rssvar/geometry.hpp"

namespace oracle {

using rssvar::Vec2;
using rssvar::Vec3;

/// Map p into the frame with tx at (1, 0) and rx at (-1, 0) using complex
/// arithmetic: q = 2 (p - m) conj(tx - rx) / |tx - rx|^2.
Vec2 normalize(Vec2 tx, Vec2 rx, Vec2 p);

/// Plan-view distance from c to the segment [a, b].
double point_segment_distance(Vec2 a, Vec2 b, Vec2 c);

/// Power integral over the two plan-view shadow wedges behind a cylinder of
/// the given diameter at `person`, seen from tx and from rx, done on a polar
/// grid centred on each node. Each wedge is bounded by the tangent lines from
/// the node and begins at the line through the person's centre. Scatterers lie in z = 0; the kernel takes the
/// 3-D scatterer position. Multiply by eta for ETAP.
double shadow_wedge_integral(Vec3 tx, Vec3 rx, Vec2 person, double diameter,
                             std::function<double(Vec3 const&)> const& kernel, int n_angle = 96,
                             int n_radial = 6000);

/// Midpoint-rule integral of f over a rectangle.
double rectangle_integral(double x0, double x1, double y0, double y1, int n,
                          std::function<double(double, double)> const& f);

}  // namespace oracle
