#pragma once

#include <complex>
#include <cstdint>
#include <json.hpp>
#include <memory>
#include <span>
#include <vector>

#include "rssvar/etap.hpp"
#include "rssvar/geometry.hpp"
#include "rssvar/propagation.hpp"
#include "rssvar/stats.hpp"

namespace rssvar {

/// Axis-aligned rectangle in the scatterer plane.
struct Region {
    double x_min = -5.0;
    double x_max = 5.0;
    double y_min = -5.0;
    double y_max = 5.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    bool contains(Vec2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
    void validate() const;
    static Region square(Vec2 center, double half_size);
};

void to_json(nlohmann::json& j, Region const& r);
void from_json(nlohmann::json const& j, Region& r);

/// One Poisson draw of scatterer positions (all at z = 0).
struct ScattererField {
    Region region;
    double eta = 0.0;
    std::uint64_t seed = 0;
    std::vector<Vec3> scatterers;
};

ScattererField sample_field(Region const& region, double eta, std::uint64_t seed);

/// Single-bounce power of a scatterer at x under the given mechanism.
double mechanism_power(LinkGeometry const& link, Vec3 x, Mechanism const& mechanism, PropagationParams const& params);

/// Per-scatterer multipath voltages of one link in one field, and the split
/// into unaffected (summed into v_bar) and affected paths.
struct LinkRealization {
    std::shared_ptr<ScattererField const> field;
    LinkGeometry link;
    std::vector<std::complex<double>> voltages;
    std::vector<std::uint8_t> affected;
    std::complex<double> v_bar;

    double total_power() const;
    double affected_power() const;
    std::size_t affected_count() const;
    /// Recompute v_bar from a new affected mask.
    void set_affected(std::vector<std::uint8_t> mask);
};

/// |V_i|^2 from the mechanism's power kernel, phases i.i.d. uniform on
/// [0, 2 pi). Nothing is affected yet, so v_bar is the full sum.
LinkRealization synthesize_voltages(std::shared_ptr<ScattererField const> field, LinkGeometry const& link,
                                    Mechanism const& mechanism, PropagationParams const& params,
                                    std::uint64_t phase_seed);

/// A path is affected when its TX leg or its RX leg crosses the person.
std::vector<std::uint8_t> classify_affected(ScattererField const& field, LinkGeometry const& link,
                                            Person const& person);
std::vector<std::uint8_t> classify_affected(LinkRealization const& realization, Person const& person);

struct RssSeries {
    std::vector<double> rss_db;
    double variance = 0.0;
};

/// Each sample redraws the phase of every affected path and records
/// 20 log10 |v_bar + sum_affected V_i|.
/// `extra` is added to the unaffected sum (used for the person's own path).
RssSeries simulate_rss_series(LinkRealization const& realization, std::size_t n_samples, std::uint64_t seed,
                              std::complex<double> extra = {});

struct EmpiricalEtap {
    double mean = 0.0;
    double half_width = 0.0;  // 3 standard errors
    std::size_t n_fields = 0;
    double truncated_fraction = 0.0;  // shadow-integral mass lost outside the region
};

/// Fraction of the shadow line integrals (both rays) lying outside `region`.
double truncated_mass_fraction(Scenario const& scn, Mechanism const& mechanism, Region const& region,
                               QuadratureSettings const& quad = {});

/// Smallest box (doubling the ray length from 4 m) that holds both shadow
/// trapezoids of the person far enough that at most max_fraction of the
/// shadow mass is lost.
Region covering_region(Scenario const& scn, Mechanism const& mechanism, double max_fraction = 0.005);

/// Poisson field restricted to region and to the cones, seen from each node,
/// that can contain the person's shadow. Scatterers outside these cones are
/// never affected, so the affected power has the same law as in a full field.
ScattererField sample_shadow_cones(Region const& region, double eta, std::uint64_t seed, LinkGeometry const& link,
                                   Person const& person);

enum class FieldSampling { full_region, shadow_cones };

/// Mean affected power over n_fields independent Poisson fields. Throws
/// RegionTooSmall when more than 1% of the shadow mass falls outside region.
EmpiricalEtap empirical_etap(Scenario const& scn, Mechanism const& mechanism, Region const& region,
                             std::size_t n_fields, std::uint64_t seed, unsigned workers = 1,
                             FieldSampling sampling = FieldSampling::shadow_cones);

struct EnsembleSettings {
    double eta = 3.0;
    double diameter = 0.4;
    Region region = {-6.0, 6.0, -6.0, 6.0};
    std::size_t realizations = 200;
    std::size_t samples = 300;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Add the person's own scatter path (power P_s(x_o)) to the unaffected sum.
    bool include_person_path = false;
};

struct PositionStats {
    Vec2 position;
    std::size_t realizations = 0;
    std::size_t without_affected = 0;
    double mean_variance = 0.0;
    double variance_half_width = 0.0;
    double mean_affected_power = 0.0;
    double affected_power_half_width = 0.0;
    double fraction_k_in_range = 0.0;  // K_dB in [-2, 10]
    double restricted_mean_variance = 0.0;
    double restricted_mean_affected_power = 0.0;
    std::size_t restricted_count = 0;  // realizations with affected < total / 2
    std::vector<double> variances;        // per realization, dB^2
    std::vector<double> affected_powers;  // per realization
};

struct EnsembleReport {
    std::vector<PositionStats> positions;
    LinearFit fit;             // mean Var(R_dB) vs 10 log10(mean affected power)
    LinearFit restricted_fit;  // same, using only affected < total / 2
    double fraction_k_in_range = 0.0;
    std::size_t realizations_per_position = 0;
    std::size_t samples_per_realization = 0;

    double a1() const { return fit.slope; }
    double a2() const { return fit.intercept; }
};

void to_json(nlohmann::json& j, EnsembleReport const& r);

/// Regression of ensemble-mean RSS variance on ensemble-mean affected power
/// across person positions.
EnsembleReport ensemble_regression(LinkGeometry const& link, std::span<Vec2 const> positions,
                                   Mechanism const& mechanism, PropagationParams const& params,
                                   EnsembleSettings const& settings);

}  // namespace rssvar
