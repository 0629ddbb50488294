#pragma once

#include <cstddef>
#include <functional>
#include <limits>

namespace rssvar {

struct QuadratureSettings {
    double rel_tol = 1e-8;
    std::size_t max_evaluations = 100000;
    /// Upper limit of the ray parameter alpha [m]; infinity integrates the
    /// full semi-infinite ray.
    double alpha_cap = std::numeric_limits<double>::infinity();
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod on [lo, hi]: the interval with
/// the largest error estimate is bisected until the summed estimate drops
/// below max(rel_tol * |value|, abs_tol) or the evaluation budget runs out
/// (QuadratureFailure).
QuadratureResult integrate_adaptive(std::function<double(double)> const& f, double lo, double hi,
                                    double rel_tol, std::size_t max_evaluations, double abs_tol = 0.0);

/// Integral of f over alpha in [0, alpha_cap) after alpha = t / (1 - t).
QuadratureResult integrate_ray(std::function<double(double)> const& f, QuadratureSettings const& settings);

}  // namespace rssvar
