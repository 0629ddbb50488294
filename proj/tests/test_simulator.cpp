#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rssvar/error.hpp"
#include "rssvar/etap.hpp"
#include "rssvar/random.hpp"
#include "rssvar/simulator.hpp"
#include "rssvar/stats.hpp"

using namespace rssvar;

TEST_SUITE("simulator")
{
    TEST_CASE("Poisson field: counts, dispersion and placement")
    {
        Region const region{-2, 2, -1, 3};
        double const eta = 3.0;
        std::vector<double> counts;
        std::size_t left = 0;
        std::size_t total = 0;
        for (std::uint64_t s = 0; s < 400; ++s) {
            auto const f = sample_field(region, eta, derive_seed(99, s));
            counts.push_back(static_cast<double>(f.scatterers.size()));
            for (auto const& x : f.scatterers) {
                CHECK(region.contains(plan(x)));
                CHECK(x.z == 0.0);
                left += x.x < 0.0;
            }
            total += f.scatterers.size();
        }
        double const expect = eta * region.area();
        double const m = mean_of(counts);
        CHECK(std::abs(m - expect) < 4.0 * std::sqrt(expect / 400.0));
        double const dispersion = sample_variance(counts) / m;
        CHECK(dispersion > 0.75);
        CHECK(dispersion < 1.25);
        double const frac = static_cast<double>(left) / static_cast<double>(total);
        CHECK(std::abs(frac - 0.5) < 4.0 * std::sqrt(0.25 / static_cast<double>(total)));
    }

    TEST_CASE("field errors")
    {
        try {
            sample_field({}, 0.0, 1);
            FAIL("expected NoScatterers");
        } catch (Error const& e) {
            CHECK(e.kind() == ErrorKind::no_scatterers);
        }
        CHECK_THROWS_AS(sample_field(Region{1, 0, 0, 1}, 1.0, 1), Error);
    }

    TEST_CASE("voltages follow the power kernel and v_bar sums the unaffected paths")
    {
        auto const link = LinkGeometry::standard(0.2);
        PropagationParams const p;
        auto field = std::make_shared<ScattererField const>(sample_field(Region::square({0, 0}, 3), 2.0, 5));
        auto r = synthesize_voltages(field, link, Mechanism::blend(0.4), p, 6);
        REQUIRE(r.voltages.size() == field->scatterers.size());
        for (std::size_t i = 0; i < r.voltages.size(); ++i) {
            double const expect = 0.4 * power_scatter(link, field->scatterers[i], p) +
                                  0.6 * power_reflect(link, field->scatterers[i], p);
            CHECK(std::norm(r.voltages[i]) == doctest::Approx(expect).epsilon(1e-12));
        }
        Person const person(Vec2{0.2, 0.7}, 0.4);
        r.set_affected(classify_affected(r, person));
        std::complex<double> sum{};
        double aff = 0.0;
        for (std::size_t i = 0; i < r.voltages.size(); ++i) {
            if (!r.affected[i]) sum += r.voltages[i];
            else aff += std::norm(r.voltages[i]);
        }
        CHECK(std::abs(r.v_bar - sum) < 1e-12);
        CHECK(r.affected_power() == doctest::Approx(aff));
        CHECK(r.affected_count() > 0);
        CHECK_THROWS_AS(r.set_affected({1, 0}), Error);
    }

    TEST_CASE("classification agrees with a rasterized shadow oracle")
    {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        double const cell = 0.01;
        std::size_t agree = 0;
        std::size_t compared = 0;
        for (int trial = 0; trial < 30; ++trial) {
            double const dz = 0.3;
            LinkGeometry const link({u(rng), u(rng), dz}, {u(rng), u(rng), dz});
            Vec2 const c{u(rng), u(rng)};
            double const dia = 0.3;
            auto const field = sample_field(Region::square({0, 0}, 3), 20.0, derive_seed(8, trial));
            auto const got = classify_affected(field, link, Person(c, dia));
            for (std::size_t i = 0; i < got.size(); ++i) {
                Vec2 const s = plan(field.scatterers[i]);
                Vec2 const centre{(std::floor(s.x / cell) + 0.5) * cell, (std::floor(s.y / cell) + 0.5) * cell};
                double const dt = oracle::point_segment_distance(plan(link.tx()), centre, c);
                double const dr = oracle::point_segment_distance(plan(link.rx()), centre, c);
                // a segment's distance to c moves by at most the endpoint shift,
                // so cells farther than half a diagonal from the edge are uniform
                double const slack = cell * std::numbers::sqrt2 / 2;
                if (std::abs(dt - dia / 2) <= slack || std::abs(dr - dia / 2) <= slack) continue;
                bool const want = dt <= dia / 2 || dr <= dia / 2;
                ++compared;
                agree += (got[i] != 0) == want;
            }
        }
        REQUIRE(compared > 10000);
        CHECK(static_cast<double>(agree) / static_cast<double>(compared) >= 0.999);
    }

    TEST_CASE("Campbell: mean total power equals eta times the area integral of the kernel")
    {
        auto const link = LinkGeometry::standard(0.5);
        PropagationParams const p;
        Region const region = Region::square({0, 0}, 3);
        double const eta = 2.0;
        double const integral = oracle::rectangle_integral(-3, 3, -3, 3, 1200, [&](double x, double y) {
            return power_scatter(link, {x, y, 0}, p);
        });
        std::vector<double> totals;
        for (std::uint64_t f = 0; f < 600; ++f) {
            auto field = std::make_shared<ScattererField const>(sample_field(region, eta, derive_seed(31, f)));
            totals.push_back(synthesize_voltages(field, link, Mechanism::scatter(), p, f).total_power());
        }
        double const se = std::sqrt(sample_variance(totals) / static_cast<double>(totals.size()));
        CHECK(std::abs(mean_of(totals) - eta * integral) < 4.0 * se);
    }

    TEST_CASE("RSS series: constant without affected paths, Rayleigh variance with many")
    {
        auto field = std::make_shared<ScattererField const>(sample_field(Region::square({0, 0}, 2), 5.0, 2));
        auto r = synthesize_voltages(field, LinkGeometry::standard(0.3), Mechanism::scatter(), {}, 3);
        auto const flat = simulate_rss_series(r, 50, 4);
        CHECK(flat.variance == 0.0);
        CHECK(flat.rss_db.front() == doctest::Approx(20 * std::log10(std::abs(r.v_bar))));
        std::complex<double> const extra{0.5, 0.0};
        CHECK(simulate_rss_series(r, 5, 4, extra).rss_db[2] ==
              doctest::Approx(20 * std::log10(std::abs(r.v_bar + extra))));

        LinkRealization many{field, LinkGeometry::standard(0.3), {}, {}, {}};
        many.voltages.assign(400, std::complex<double>{0.05, 0.0});
        many.set_affected(std::vector<std::uint8_t>(400, 1));
        auto const s = simulate_rss_series(many, 40000, 5);
        double const rayleigh = std::pow(10.0 / std::numbers::ln10, 2) * std::numbers::pi * std::numbers::pi / 6.0;
        CHECK(s.variance == doctest::Approx(rayleigh).epsilon(0.04));
    }

    TEST_CASE("empirical ETAP agrees with the analytic value and its half width shrinks as 1/sqrt(n)")
    {
        Scenario const scn{LinkGeometry::standard(0.0), Person(Vec2{0.3, 0.9}, 0.05), {}, 4.0};
        double const model = etap(scn, Mechanism::scatter()).value;
        Region const region = covering_region(scn, Mechanism::scatter());
        auto const e100 = empirical_etap(scn, Mechanism::scatter(), region, 100, 1);
        auto const e400 = empirical_etap(scn, Mechanism::scatter(), region, 400, 2);
        auto const e1600 = empirical_etap(scn, Mechanism::scatter(), region, 1600, 3);
        CHECK(e1600.n_fields == 1600);
        CHECK(e1600.truncated_fraction <= 0.005);
        double const r1 = e100.half_width / e400.half_width;
        double const r2 = e400.half_width / e1600.half_width;
        CHECK(r1 > 1.4);
        CHECK(r1 < 2.8);
        CHECK(r2 > 1.4);
        CHECK(r2 < 2.8);
        CHECK(std::abs(e1600.mean - model) < e1600.half_width + 0.02 * model);
    }

    TEST_CASE("shadow-cone sampling has the same affected-power law as a full field")
    {
        Scenario const scn{LinkGeometry::standard(0.0), Person(Vec2{-0.4, 0.6}, 0.1), {}, 3.0};
        Region const region = Region::square({0, 0}, 8);
        auto const cones = empirical_etap(scn, Mechanism::scatter(), region, 600, 10, 1, FieldSampling::shadow_cones);
        auto const full = empirical_etap(scn, Mechanism::scatter(), region, 600, 11, 1, FieldSampling::full_region);
        CHECK(std::abs(cones.mean - full.mean) < cones.half_width + full.half_width);
        auto const f = sample_field(region, 3.0, 12);
        auto const c = sample_shadow_cones(region, 3.0, 12, scn.link, scn.person);
        for (auto const& x : c.scatterers) CHECK(region.contains(plan(x)));
        CHECK(c.scatterers.size() < f.scatterers.size());
        auto const aff = classify_affected(c, scn.link, scn.person);
        CHECK(std::count(aff.begin(), aff.end(), 1) > 0);
    }

    TEST_CASE("truncation checks")
    {
        Scenario const scn{LinkGeometry::standard(0.0), Person(Vec2{0, 1}, 0.05), {}, 1.0};
        double const small = truncated_mass_fraction(scn, Mechanism::scatter(), Region::square({0, 0}, 2));
        double const big = truncated_mass_fraction(scn, Mechanism::scatter(), Region::square({0, 0}, 20));
        CHECK(small > big);
        CHECK(big >= 0.0);
        auto const cover = covering_region(scn, Mechanism::reflect());
        CHECK(truncated_mass_fraction(scn, Mechanism::reflect(), cover) <= 0.005);
        try {
            empirical_etap(scn, Mechanism::scatter(), Region::square({0, 0}, 1.5), 10, 1);
            FAIL("expected RegionTooSmall");
        } catch (Error const& e) {
            CHECK(e.kind() == ErrorKind::region_too_small);
        }
    }

    TEST_CASE("ensemble regression: determinism, worker independence, person path toggle")
    {
        std::vector<Vec2> const pos{{0, 0.3}, {0.3, 0.6}, {-0.3, 0.9}, {0, 1.2}};
        EnsembleSettings s;
        s.realizations = 20;
        s.samples = 60;
        s.region = Region::square({0, 0}, 4);
        s.seed = 12;
        auto const link = LinkGeometry::standard(0.3);
        auto const a = ensemble_regression(link, pos, Mechanism::scatter(), {}, s);
        s.workers = 3;
        auto const b = ensemble_regression(link, pos, Mechanism::scatter(), {}, s);
        CHECK(nlohmann::json(a).dump() == nlohmann::json(b).dump());
        CHECK(a.positions.size() == 4);
        CHECK(a.positions[0].variances.size() == 20);
        s.include_person_path = true;
        auto const c = ensemble_regression(link, pos, Mechanism::scatter(), {}, s);
        CHECK(c.positions[0].mean_affected_power == a.positions[0].mean_affected_power);
        CHECK(c.positions[0].mean_variance != a.positions[0].mean_variance);
        s.eta = 0.0;
        CHECK_THROWS_AS(ensemble_regression(link, pos, Mechanism::scatter(), {}, s), Error);
    }
}
