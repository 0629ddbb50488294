#include "rssvar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rssvar/error.hpp"

namespace rssvar {

void RunningMoments::add(double x)
{
    ++count;
    double const delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

void RunningMoments::merge(RunningMoments const& other)
{
    if (other.count == 0) {
        return;
    }
    if (count == 0) {
        *this = other;
        return;
    }
    double const n_a = static_cast<double>(count);
    double const n_b = static_cast<double>(other.count);
    double const n = n_a + n_b;
    double const delta = other.mean - mean;
    mean += delta * n_b / n;
    m2 += other.m2 + delta * delta * n_a * n_b / n;
    count += other.count;
}

double RunningMoments::variance() const { return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1); }

double mean_of(std::span<double const> xs)
{
    if (xs.empty()) {
        return 0.0;
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<double const> xs)
{
    if (xs.size() < 2) {
        return 0.0;
    }
    double const m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(xs.size() - 1);
}

LinearFit fit_line(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorKind::invalid_argument, "line fit needs at least two paired samples");
    }
    double const mx = mean_of(x);
    double const my = mean_of(y);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "line fit needs at least two distinct x values");
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double const r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
        f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
    }
    f.residual_rms = std::sqrt(ss_res / static_cast<double>(x.size()));
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

namespace {

std::vector<double> average_ranks(std::span<double const> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        double const r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorKind::invalid_argument, "rank correlation needs at least two paired samples");
    }
    auto const rx = average_ranks(x);
    auto const ry = average_ranks(y);
    double const mx = mean_of(rx);
    double const my = mean_of(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace rssvar
