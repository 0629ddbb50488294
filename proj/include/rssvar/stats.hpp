#pragma once

#include <cstddef>
#include <span>

namespace rssvar {

/// Welford accumulator; merge() uses the pairwise (Chan et al.) update, so
/// combining shards in a fixed order gives a fixed result.
struct RunningMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(RunningMoments const& other);
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const;
};

/// Two-pass unbiased sample variance.
double sample_variance(std::span<double const> xs);
double mean_of(std::span<double const> xs);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double residual_rms = 0.0;
    double max_abs_residual = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x.
LinearFit fit_line(std::span<double const> x, std::span<double const> y);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<double const> x, std::span<double const> y);

}  // namespace rssvar
