#include "rssvar/fading.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "rssvar/error.hpp"
#include "rssvar/parallel.hpp"
#include "rssvar/quadrature.hpp"
#include "rssvar/random.hpp"
#include "rssvar/stats.hpp"

namespace rssvar {

namespace {

constexpr double kDbPerNeper = 20.0 / std::numbers::ln10;  // 20 log10(r) = kDbPerNeper * ln(r)
constexpr std::size_t kChunk = 1u << 18;

double log_bessel_i0(double x)
{
    if (x < 500.0) {
        return std::log(std::cyl_bessel_i(0.0, x));
    }
    // large-argument expansion of I0(x) e^{-x} sqrt(2 pi x)
    double const inv = 1.0 / (8.0 * x);
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log1p(inv + 4.5 * inv * inv);
}

double amplitude_for(double k_db)
{
    if (std::isinf(k_db) && k_db < 0) {
        return 0.0;
    }
    if (!std::isfinite(k_db)) {
        throw Error(ErrorKind::invalid_argument, "K-factor must be finite or -inf");
    }
    return std::sqrt(std::pow(10.0, k_db / 10.0));
}

/// Var(R_dB) by integrating over s = ln r against the Ricean density with
/// unit diffuse power: p(s) = 2 e^{2s} exp(-(e^{2s} + A^2)) I0(2 A e^s).
double var_rdb_quadrature(double k_db)
{
    double const amp = amplitude_for(k_db);
    auto density = [amp](double s) {
        double const r = std::exp(s);
        double const log_p =
            std::numbers::ln2 + 2.0 * s - (r * r + amp * amp) + (amp > 0.0 ? log_bessel_i0(2.0 * amp * r) : 0.0);
        return std::exp(log_p);
    };
    double const s_lo = -30.0;
    double const s_hi = std::log(amp + 1.0) + 4.0;
    // at high K the density is a spike of width ~1/A around ln A; break the
    // range around it so the adaptive rule cannot step over it
    double const centre = amp > 1.0 ? std::log(amp) : 0.0;
    double const width = 1.0 / std::max(amp, 1.0);
    std::vector<double> cuts{s_lo, s_hi};
    for (double k : {0.5, 2.0, 8.0, 30.0}) {
        for (double c : {centre - k * width, centre + k * width}) {
            if (c > s_lo && c < s_hi) cuts.push_back(c);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    double const tol = 1e-9;
    std::size_t const budget = 200000;
    // pieces far from the peak hold almost nothing; judge them against the
    // scale of the whole integrand rather than their own value
    double const peak_mass =
        integrate_adaptive(density, std::max(s_lo, centre - 0.5 * width), std::min(s_hi, centre + 0.5 * width), tol,
                           budget)
            .value;
    auto integrate = [&](auto const& f, double floor) {
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            sum += integrate_adaptive(f, cuts[i], cuts[i + 1], tol, budget, floor).value;
        }
        return sum;
    };
    double const mass = integrate(density, 1e-13 * peak_mass);
    double const mean_s = integrate([&](double s) { return s * density(s); },
                                    1e-13 * peak_mass * std::max(1.0, std::abs(centre))) /
                          mass;
    double const var_s = integrate([&](double s) { return (s - mean_s) * (s - mean_s) * density(s); },
                                   1e-13 * peak_mass * width * width) /
                         mass;
    return kDbPerNeper * kDbPerNeper * var_s;
}

double var_rdb_monte_carlo(double k_db, std::size_t draws, std::uint64_t seed, unsigned workers)
{
    double const amp = amplitude_for(k_db);
    std::size_t const chunks = (draws + kChunk - 1) / kChunk;
    std::vector<RunningMoments> parts(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        Rng rng = make_rng(seed, c);
        std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
        std::size_t const n = std::min(kChunk, draws - c * kChunk);
        RunningMoments m;
        for (std::size_t i = 0; i < n; ++i) {
            double const re = amp + noise(rng);
            double const im = noise(rng);
            m.add(10.0 * std::log10(re * re + im * im));
        }
        parts[c] = m;
    });
    RunningMoments total;
    for (auto const& p : parts) {
        total.merge(p);
    }
    return total.variance();
}

}  // namespace

void RiceanSpec::validate() const
{
    if (!(sigma2_aff > 0.0) || !std::isfinite(sigma2_aff) || !std::isfinite(std::abs(v_bar))) {
        throw Error(ErrorKind::invalid_argument, "Ricean spec needs finite v_bar and sigma2_aff > 0");
    }
}

double k_factor_db(RiceanSpec const& spec)
{
    spec.validate();
    double const los = std::norm(spec.v_bar);
    if (los == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(los / spec.sigma2_aff);
}

double var_rdb_of_k(double k_db, VarRdbMethod const& method)
{
    if (method.kind == VarRdbMethod::Kind::monte_carlo) {
        if (method.draws < 2) {
            throw Error(ErrorKind::invalid_argument, "Monte Carlo variance needs at least two draws");
        }
        return var_rdb_monte_carlo(k_db, method.draws, method.seed, method.workers);
    }
    return var_rdb_quadrature(k_db);
}

LinearVarModel fit_linear_var_model(std::span<double const> k_db, std::span<double const> variance)
{
    if (k_db.size() != variance.size() || k_db.size() < 13) {
        throw Error(ErrorKind::invalid_argument, "linear variance fit needs at least 13 paired samples");
    }
    auto const [lo, hi] = std::minmax_element(k_db.begin(), k_db.end());
    if (*lo > -2.0 + 1e-9 || *hi < 10.0 - 1e-9) {
        throw Error(ErrorKind::invalid_argument, "linear variance fit grid must span [-2, 10] dB");
    }
    auto const line = fit_line(k_db, variance);
    LinearVarModel m;
    m.a0 = line.intercept;
    m.a1 = -line.slope;
    m.k_lo = *lo;
    m.k_hi = *hi;
    m.max_residual = line.max_abs_residual;
    return m;
}

LinearVarModel fit_linear_var_model(std::size_t points)
{
    if (points < 13) {
        throw Error(ErrorKind::invalid_argument, "linear variance fit needs at least 13 grid points");
    }
    std::vector<double> k(points);
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i) {
        k[i] = -2.0 + 12.0 * static_cast<double>(i) / static_cast<double>(points - 1);
        v[i] = var_rdb_of_k(k[i]);
    }
    return fit_linear_var_model(k, v);
}

VarPrediction expected_var_from_etap(double etap, LinearVarModel const& model, double a2)
{
    if (!(etap >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "ETAP must be non-negative");
    }
    VarPrediction p;
    p.unclamped = etap > 0.0 ? a2 + model.a1 * 10.0 * std::log10(etap) : -std::numeric_limits<double>::infinity();
    p.value = std::clamp(p.unclamped, kVarianceFloor, kVarianceCeiling);
    p.saturated = p.value != p.unclamped;
    return p;
}

LogGap expected_log_gap(int m, double sigma2)
{
    if (m < 1 || !(sigma2 > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "expected_log_gap needs m >= 1 and sigma2 > 0");
    }
    constexpr double kDbPerNeperPower = 10.0 / std::numbers::ln10;
    LogGap g;
    g.exact_db = kDbPerNeperPower * (std::log(sigma2) + boost::math::digamma(2.0 * m));
    g.approx_db = 10.0 * std::log10(2.0 * m * sigma2);
    g.gap_db = g.approx_db - g.exact_db;
    return g;
}

double expected_log_monte_carlo(int m, double sigma2, std::size_t draws, std::uint64_t seed, unsigned workers)
{
    if (m < 1 || !(sigma2 > 0.0) || draws == 0) {
        throw Error(ErrorKind::invalid_argument, "expected_log_monte_carlo needs m >= 1, sigma2 > 0, draws > 0");
    }
    std::size_t const chunks = (draws + kChunk - 1) / kChunk;
    std::vector<RunningMoments> parts(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        Rng rng = make_rng(seed, c);
        std::normal_distribution<double> component(0.0, std::sqrt(0.5 * sigma2));
        std::size_t const n = std::min(kChunk, draws - c * kChunk);
        RunningMoments acc;
        for (std::size_t i = 0; i < n; ++i) {
            double y = 0.0;
            for (int j = 0; j < 4 * m; ++j) {
                double const u = component(rng);
                y += u * u;
            }
            acc.add(10.0 * std::log10(y));
        }
        parts[c] = acc;
    });
    RunningMoments total;
    for (auto const& p : parts) {
        total.merge(p);
    }
    return total.mean;
}

}  // namespace rssvar
