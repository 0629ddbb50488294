#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rssvar {

/// Unaffected-sum voltage and total power of the affected multipath.
struct RiceanSpec {
    std::complex<double> v_bar;
    double sigma2_aff = 1.0;

    void validate() const;
};

/// 10 log10(|v_bar|^2 / sigma2_aff); -inf for the Rayleigh case v_bar = 0.
double k_factor_db(RiceanSpec const& spec);

struct VarRdbMethod {
    enum class Kind { quadrature, monte_carlo };
    Kind kind = Kind::quadrature;
    std::size_t draws = 10'000'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    static VarRdbMethod quadrature() { return {}; }
    static VarRdbMethod monte_carlo(std::size_t draws, std::uint64_t seed, unsigned workers = 1)
    {
        return {Kind::monte_carlo, draws, seed, workers};
    }
};

/// Var[20 log10 |v_bar + n|] in dB^2 for a circular complex Gaussian n whose
/// power sets the requested K-factor. k_db may be -inf (Rayleigh).
double var_rdb_of_k(double k_db, VarRdbMethod const& method = {});

/// Var(R_dB) ~ a0 - a1 K_dB over [k_lo, k_hi].
struct LinearVarModel {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double k_lo = -2.0;
    double k_hi = 10.0;
    double max_residual = 0.0;

    double predict(double k_db) const { return a0 - a1 * k_db; }
};

/// Least-squares affine fit to (k_db, variance) samples. The grid must have
/// at least 13 points and span [-2, 10] dB.
LinearVarModel fit_linear_var_model(std::span<double const> k_db, std::span<double const> variance);

/// Fit to var_rdb_of_k (quadrature) on `points` evenly spaced K_dB values
/// over [-2, 10] dB.
LinearVarModel fit_linear_var_model(std::size_t points = 13);

inline constexpr double kVarianceFloor = 3.0;     // dB^2
inline constexpr double kVarianceCeiling = 27.0;  // dB^2

struct VarPrediction {
    double value = 0.0;      // clamped to [kVarianceFloor, kVarianceCeiling]
    double unclamped = 0.0;  // a2 + a1 * 10 log10(etap)
    bool saturated = false;
};

/// Ensemble-mean RSS variance predicted from the ETAP.
VarPrediction expected_var_from_etap(double etap, LinearVarModel const& model, double a2);

struct LogGap {
    double exact_db = 0.0;   // E[10 log10 Y]
    double approx_db = 0.0;  // 10 log10 E[Y]
    double gap_db = 0.0;     // approx - exact
};

/// Jensen gap of 10 log10 for Y = sum_{j=1}^{2m} |U_j|^2 with U_j i.i.d.
/// circular complex Gaussian, E|U_j|^2 = sigma2. Y is a scaled chi-square
/// with 4m degrees of freedom, so E[ln Y] = ln(sigma2) + digamma(2m).
LogGap expected_log_gap(int m, double sigma2);

/// Monte Carlo estimate of E[10 log10 Y] for the same Y.
double expected_log_monte_carlo(int m, double sigma2, std::size_t draws, std::uint64_t seed, unsigned workers = 1);

}  // namespace rssvar
