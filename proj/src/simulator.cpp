#include "rssvar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rssvar/error.hpp"
#include "rssvar/parallel.hpp"
#include "rssvar/quadrature.hpp"
#include "rssvar/random.hpp"

namespace rssvar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxTruncation = 0.01;

/// Distance along a 3-D ray until its plan-view trace leaves the region.
double exit_distance(Vec3 origin, Vec3 dir, Region const& region)
{
    double out = std::numeric_limits<double>::infinity();
    auto axis = [&out](double p, double d, double lo, double hi) {
        if (d > 0.0) {
            out = std::min(out, (hi - p) / d);
        } else if (d < 0.0) {
            out = std::min(out, (lo - p) / d);
        }
    };
    axis(origin.x, dir.x, region.x_min, region.x_max);
    axis(origin.y, dir.y, region.y_min, region.y_max);
    return std::max(out, 0.0);
}

struct Summary {
    double mean = 0.0;
    double half_width = 0.0;
};

Summary summarize(std::span<double const> xs)
{
    Summary s;
    if (xs.empty()) {
        return s;
    }
    s.mean = mean_of(xs);
    if (xs.size() > 1) {
        s.half_width = 3.0 * std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
    }
    return s;
}

}  // namespace

void Region::validate() const
{
    if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(area())) {
        throw Error(ErrorKind::invalid_argument, "region must have positive finite area");
    }
}

Region Region::square(Vec2 center, double half_size)
{
    return {center.x - half_size, center.x + half_size, center.y - half_size, center.y + half_size};
}

void to_json(nlohmann::json& j, Region const& r)
{
    j = {{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

void from_json(nlohmann::json const& j, Region& r)
{
    r.x_min = j.at("x_min").get<double>();
    r.x_max = j.at("x_max").get<double>();
    r.y_min = j.at("y_min").get<double>();
    r.y_max = j.at("y_max").get<double>();
    r.validate();
}

ScattererField sample_field(Region const& region, double eta, std::uint64_t seed)
{
    region.validate();
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw Error(ErrorKind::no_scatterers, "scatterer density must be positive");
    }
    ScattererField f;
    f.region = region;
    f.eta = eta;
    f.seed = seed;
    Rng rng(seed);
    std::poisson_distribution<long long> count(eta * region.area());
    std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
    std::uniform_real_distribution<double> uy(region.y_min, region.y_max);
    auto const n = static_cast<std::size_t>(count(rng));
    f.scatterers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double const x = ux(rng);
        double const y = uy(rng);
        f.scatterers.push_back({x, y, 0.0});
    }
    return f;
}

ScattererField sample_shadow_cones(Region const& region, double eta, std::uint64_t seed, LinkGeometry const& link,
                                   Person const& person)
{
    region.validate();
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw Error(ErrorKind::no_scatterers, "scatterer density must be positive");
    }
    struct Cone {
        Vec2 apex;
        double heading = 0.0;
        double half_angle = 0.0;
        double radius = 0.0;

        bool contains(Vec2 p) const
        {
            Vec2 const d = p - apex;
            if (norm(d) > radius) return false;
            double const off = std::remainder(std::atan2(d.y, d.x) - heading, 2.0 * std::numbers::pi);
            return std::abs(off) <= half_angle;
        }
    };
    double const r = 0.5 * person.diameter();
    std::vector<Cone> cones;
    for (Vec3 node : {link.tx(), link.rx()}) {
        Vec2 const apex = plan(node);
        Vec2 const d = person.center2d() - apex;
        double radius = 0.0;
        for (Vec2 c : {Vec2{region.x_min, region.y_min}, Vec2{region.x_min, region.y_max},
                       Vec2{region.x_max, region.y_min}, Vec2{region.x_max, region.y_max}}) {
            radius = std::max(radius, distance(c, apex));
        }
        double const a = norm(d);
        if (a <= r) {
            // the person covers the node: every direction can be shadowed
            cones.push_back({apex, 0.0, std::numbers::pi, radius});
        } else {
            // small outward margin so rounding never clips a boundary scatterer
            double const half = std::min(std::numbers::pi, std::asin(r / a) * (1.0 + 1e-9) + 1e-12);
            cones.push_back({apex, std::atan2(d.y, d.x), half, radius});
        }
    }

    ScattererField f;
    f.region = region;
    f.eta = eta;
    f.seed = seed;
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < cones.size(); ++k) {
        Cone const& c = cones[k];
        std::poisson_distribution<long long> count(eta * c.half_angle * c.radius * c.radius);
        auto const n = count(rng);
        for (long long i = 0; i < n; ++i) {
            double const rho = c.radius * std::sqrt(unit(rng));
            double const ang = c.heading + c.half_angle * (2.0 * unit(rng) - 1.0);
            Vec2 const p = c.apex + Vec2{rho * std::cos(ang), rho * std::sin(ang)};
            if (!region.contains(p)) continue;
            // points already covered by an earlier cone belong to that cone's draw
            bool seen = false;
            for (std::size_t j = 0; j < k; ++j) {
                seen = seen || cones[j].contains(p);
            }
            if (!seen) f.scatterers.push_back(on_plane(p));
        }
    }
    return f;
}

double mechanism_power(LinkGeometry const& link, Vec3 x, Mechanism const& mechanism, PropagationParams const& params)
{
    switch (mechanism.kind) {
    case Mechanism::Kind::scatter: return power_scatter(link, x, params);
    case Mechanism::Kind::reflect: return power_reflect(link, x, params);
    case Mechanism::Kind::blend: break;
    }
    double const w = mechanism.weight;
    double p = 0.0;
    if (w > 0.0) p += w * power_scatter(link, x, params);
    if (w < 1.0) p += (1.0 - w) * power_reflect(link, x, params);
    return p;
}

double LinkRealization::total_power() const
{
    double p = 0.0;
    for (auto const& v : voltages) p += std::norm(v);
    return p;
}

double LinkRealization::affected_power() const
{
    double p = 0.0;
    for (std::size_t i = 0; i < voltages.size(); ++i) {
        if (affected[i]) p += std::norm(voltages[i]);
    }
    return p;
}

std::size_t LinkRealization::affected_count() const
{
    return static_cast<std::size_t>(std::count(affected.begin(), affected.end(), std::uint8_t{1}));
}

void LinkRealization::set_affected(std::vector<std::uint8_t> mask)
{
    if (mask.size() != voltages.size()) {
        throw Error(ErrorKind::invalid_argument, "affected mask size does not match the voltage count");
    }
    affected = std::move(mask);
    v_bar = {};
    for (std::size_t i = 0; i < voltages.size(); ++i) {
        if (!affected[i]) v_bar += voltages[i];
    }
}

LinkRealization synthesize_voltages(std::shared_ptr<ScattererField const> field, LinkGeometry const& link,
                                    Mechanism const& mechanism, PropagationParams const& params,
                                    std::uint64_t phase_seed)
{
    if (!field) {
        throw Error(ErrorKind::invalid_argument, "no scatterer field");
    }
    params.validate();
    LinkRealization r{field, link, {}, {}, {}};
    r.voltages.reserve(field->scatterers.size());
    Rng rng(phase_seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    for (auto const& x : field->scatterers) {
        double const amp = std::sqrt(mechanism_power(link, x, mechanism, params));
        r.voltages.push_back(std::polar(amp, phase(rng)));
    }
    r.set_affected(std::vector<std::uint8_t>(r.voltages.size(), 0));
    return r;
}

std::vector<std::uint8_t> classify_affected(ScattererField const& field, LinkGeometry const& link,
                                            Person const& person)
{
    std::vector<std::uint8_t> out(field.scatterers.size(), 0);
    Vec3 const tx = link.tx();
    Vec3 const rx = link.rx();
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto const& x = field.scatterers[i];
        out[i] = (segment_shadowed(tx, x, person) || segment_shadowed(rx, x, person)) ? 1 : 0;
    }
    return out;
}

std::vector<std::uint8_t> classify_affected(LinkRealization const& realization, Person const& person)
{
    if (!realization.field) {
        throw Error(ErrorKind::invalid_argument, "realization has no scatterer field");
    }
    return classify_affected(*realization.field, realization.link, person);
}

RssSeries simulate_rss_series(LinkRealization const& realization, std::size_t n_samples, std::uint64_t seed,
                              std::complex<double> extra)
{
    std::vector<double> amps;
    for (std::size_t i = 0; i < realization.voltages.size(); ++i) {
        if (realization.affected[i]) amps.push_back(std::abs(realization.voltages[i]));
    }
    std::complex<double> const base = realization.v_bar + extra;
    Rng rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    RssSeries s;
    s.rss_db.reserve(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        std::complex<double> v = base;
        for (double a : amps) {
            v += std::polar(a, phase(rng));
        }
        s.rss_db.push_back(20.0 * std::log10(std::abs(v)));
    }
    s.variance = amps.empty() ? 0.0 : sample_variance(s.rss_db);
    return s;
}

double truncated_mass_fraction(Scenario const& scn, Mechanism const& mechanism, Region const& region,
                               QuadratureSettings const& quad)
{
    scn.validate();
    region.validate();
    Vec3 const xo = scn.person.center();
    if (!region.contains(plan(xo))) {
        throw Error(ErrorKind::region_too_small, "person lies outside the simulation region");
    }
    if (mechanism.kind != Mechanism::Kind::scatter && scn.params.n_p <= 2.0) {
        throw Error(ErrorKind::region_too_small, "reflection shadow mass is unbounded for n_p <= 2");
    }
    auto const g = geometry_scalars(scn.link, scn.person);
    double full = 0.0;
    double inside = 0.0;
    for (auto const& [apex, dist] : {std::pair{scn.link.tx(), g.a}, std::pair{scn.link.rx(), g.b}}) {
        Vec3 const dir = (1.0 / dist) * (xo - apex);
        auto integrand = [&, d = dist](double alpha) {
            return (alpha + d) / d * mechanism_power(scn.link, xo + alpha * dir, mechanism, scn.params);
        };
        QuadratureSettings capped = quad;
        capped.alpha_cap = exit_distance(xo, dir, region);
        QuadratureSettings open = quad;
        open.alpha_cap = std::numeric_limits<double>::infinity();
        full += integrate_ray(integrand, open).value;
        if (capped.alpha_cap > 0.0) {
            inside += integrate_ray(integrand, capped).value;
        }
    }
    return full > 0.0 ? std::max(0.0, 1.0 - inside / full) : 0.0;
}

Region covering_region(Scenario const& scn, Mechanism const& mechanism, double max_fraction)
{
    scn.validate();
    auto const g = geometry_scalars(scn.link, scn.person);
    Vec2 const xo = scn.person.center2d();
    Vec2 const tx = plan(scn.link.tx());
    Vec2 const rx = plan(scn.link.rx());
    for (double len = 4.0; len <= 1e5; len *= 2.0) {
        Region box{std::min(tx.x, rx.x), std::max(tx.x, rx.x), std::min(tx.y, rx.y), std::max(tx.y, rx.y)};
        auto cover = [&box](Vec2 p) {
            box.x_min = std::min(box.x_min, p.x);
            box.x_max = std::max(box.x_max, p.x);
            box.y_min = std::min(box.y_min, p.y);
            box.y_max = std::max(box.y_max, p.y);
        };
        cover(xo);
        double pad = 0.0;
        for (auto const& [apex, dist] : {std::pair{scn.link.tx(), g.a}, std::pair{scn.link.rx(), g.b}}) {
            Vec2 const d = plan(scn.person.center() - apex);
            double const n = norm(d);
            if (n > 0.0) {
                cover(xo + (len / n) * d);
            }
            pad = std::max(pad, scn.person.diameter() * (len + dist) / dist);
        }
        pad += 1.0;
        box = {box.x_min - pad, box.x_max + pad, box.y_min - pad, box.y_max + pad};
        if (truncated_mass_fraction(scn, mechanism, box) <= max_fraction) {
            return box;
        }
    }
    throw Error(ErrorKind::region_too_small, "no finite region captures the shadow mass");
}

EmpiricalEtap empirical_etap(Scenario const& scn, Mechanism const& mechanism, Region const& region,
                             std::size_t n_fields, std::uint64_t seed, unsigned workers, FieldSampling sampling)
{
    if (n_fields < 2) {
        throw Error(ErrorKind::invalid_argument, "empirical ETAP needs at least two fields");
    }
    EmpiricalEtap out;
    out.n_fields = n_fields;
    out.truncated_fraction = truncated_mass_fraction(scn, mechanism, region);
    if (out.truncated_fraction > kMaxTruncation) {
        std::ostringstream msg;
        msg << "region loses " << 100.0 * out.truncated_fraction << "% of the shadow mass (limit 1%)";
        throw Error(ErrorKind::region_too_small, msg.str());
    }
    std::vector<double> per_field(n_fields, 0.0);
    parallel_for(n_fields, workers, [&](std::size_t f) {
        auto const field = sampling == FieldSampling::shadow_cones
                               ? sample_shadow_cones(region, scn.eta, derive_seed(seed, f), scn.link, scn.person)
                               : sample_field(region, scn.eta, derive_seed(seed, f));
        auto const mask = classify_affected(field, scn.link, scn.person);
        double sum = 0.0;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) sum += mechanism_power(scn.link, field.scatterers[i], mechanism, scn.params);
        }
        per_field[f] = sum;
    });
    auto const s = summarize(per_field);
    out.mean = s.mean;
    out.half_width = s.half_width;
    return out;
}

void to_json(nlohmann::json& j, EnsembleReport const& r)
{
    auto fit_json = [](LinearFit const& f) {
        return nlohmann::json{{"slope", f.slope},
                              {"intercept", f.intercept},
                              {"r2", f.r2},
                              {"residual_rms", f.residual_rms},
                              {"max_abs_residual", f.max_abs_residual}};
    };
    j = nlohmann::json::object();
    j["a1"] = r.a1();
    j["a2"] = r.a2();
    j["fit"] = fit_json(r.fit);
    j["restricted_fit"] = fit_json(r.restricted_fit);
    j["fraction_k_in_range"] = r.fraction_k_in_range;
    j["realizations_per_position"] = r.realizations_per_position;
    j["samples_per_realization"] = r.samples_per_realization;
    auto& positions = j["positions"] = nlohmann::json::array();
    for (auto const& p : r.positions) {
        positions.push_back({{"x", p.position.x},
                             {"y", p.position.y},
                             {"realizations", p.realizations},
                             {"without_affected", p.without_affected},
                             {"mean_variance", p.mean_variance},
                             {"variance_half_width", p.variance_half_width},
                             {"mean_affected_power", p.mean_affected_power},
                             {"affected_power_half_width", p.affected_power_half_width},
                             {"fraction_k_in_range", p.fraction_k_in_range},
                             {"restricted_count", p.restricted_count},
                             {"restricted_mean_variance", p.restricted_mean_variance},
                             {"restricted_mean_affected_power", p.restricted_mean_affected_power},
                             {"variances", p.variances},
                             {"affected_powers", p.affected_powers}});
    }
}

EnsembleReport ensemble_regression(LinkGeometry const& link, std::span<Vec2 const> positions,
                                   Mechanism const& mechanism, PropagationParams const& params,
                                   EnsembleSettings const& settings)
{
    if (positions.size() < 3 || settings.realizations < 2 || settings.samples < 2) {
        throw Error(ErrorKind::invalid_argument,
                    "ensemble needs at least 3 positions, 2 realizations and 2 samples per realization");
    }
    if (!(settings.eta > 0.0)) {
        throw Error(ErrorKind::no_scatterers, "scatterer density must be positive");
    }
    settings.region.validate();
    params.validate();

    struct Draw {
        double variance = 0.0;
        double affected = 0.0;
        double total = 0.0;
        double k_db = 0.0;
    };
    std::size_t const per = settings.realizations;
    std::vector<Draw> draws(positions.size() * per);
    parallel_for(draws.size(), settings.workers, [&](std::size_t idx) {
        Person const person(positions[idx / per], settings.diameter);
        auto field = std::make_shared<ScattererField const>(
            sample_field(settings.region, settings.eta, derive_seed(settings.seed, 3 * idx)));
        auto r = synthesize_voltages(field, link, mechanism, params, derive_seed(settings.seed, 3 * idx + 1));
        r.set_affected(classify_affected(r, person));
        std::complex<double> extra{};
        if (settings.include_person_path) {
            extra = std::sqrt(power_scatter(link, person.center(), params));
        }
        auto const series = simulate_rss_series(r, settings.samples, derive_seed(settings.seed, 3 * idx + 2), extra);
        Draw& d = draws[idx];
        d.variance = series.variance;
        d.affected = r.affected_power();
        d.total = r.total_power() + std::norm(extra);
        d.k_db = d.affected > 0.0 ? 10.0 * std::log10(std::norm(r.v_bar + extra) / d.affected)
                                  : std::numeric_limits<double>::infinity();
    });

    EnsembleReport rep;
    rep.realizations_per_position = per;
    rep.samples_per_realization = settings.samples;
    std::vector<double> fx, fy, rx, ry;
    std::size_t in_range = 0;
    std::size_t with_affected = 0;
    for (std::size_t p = 0; p < positions.size(); ++p) {
        PositionStats st;
        st.position = positions[p];
        st.realizations = per;
        std::vector<double> rv, ra;
        std::size_t k_ok = 0;
        for (std::size_t k = 0; k < per; ++k) {
            Draw const& d = draws[p * per + k];
            st.variances.push_back(d.variance);
            st.affected_powers.push_back(d.affected);
            if (d.affected == 0.0) {
                ++st.without_affected;
            } else {
                ++with_affected;
                if (d.k_db >= -2.0 && d.k_db <= 10.0) {
                    ++k_ok;
                }
            }
            if (d.affected < 0.5 * d.total) {
                rv.push_back(d.variance);
                ra.push_back(d.affected);
            }
        }
        auto const v = summarize(st.variances);
        auto const a = summarize(st.affected_powers);
        st.mean_variance = v.mean;
        st.variance_half_width = v.half_width;
        st.mean_affected_power = a.mean;
        st.affected_power_half_width = a.half_width;
        std::size_t const nonzero = per - st.without_affected;
        st.fraction_k_in_range = nonzero > 0 ? static_cast<double>(k_ok) / static_cast<double>(nonzero) : 0.0;
        in_range += k_ok;
        st.restricted_count = rv.size();
        if (!rv.empty()) {
            st.restricted_mean_variance = mean_of(rv);
            st.restricted_mean_affected_power = mean_of(ra);
        }
        if (st.mean_affected_power > 0.0) {
            fx.push_back(10.0 * std::log10(st.mean_affected_power));
            fy.push_back(st.mean_variance);
        }
        if (st.restricted_count >= 2 && st.restricted_mean_affected_power > 0.0) {
            rx.push_back(10.0 * std::log10(st.restricted_mean_affected_power));
            ry.push_back(st.restricted_mean_variance);
        }
        rep.positions.push_back(std::move(st));
    }
    rep.fraction_k_in_range =
        with_affected > 0 ? static_cast<double>(in_range) / static_cast<double>(with_affected) : 0.0;
    if (fx.size() < 3) {
        throw Error(ErrorKind::invalid_argument, "fewer than three positions produced affected multipath");
    }
    rep.fit = fit_line(fx, fy);
    if (rx.size() >= 3) {
        rep.restricted_fit = fit_line(rx, ry);
    }
    return rep;
}

}  // namespace rssvar
