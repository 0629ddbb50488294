#include <doctest.h>

#include <cmath>
#include <random>

#include "rssvar/error.hpp"
#include "rssvar/propagation.hpp"

using namespace rssvar;

namespace {

double dist(Vec3 a, Vec3 b) { return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z)); }

}  // namespace

TEST_SUITE("propagation")
{
    TEST_CASE("scatter kernel values")
    {
        PropagationParams const p;
        LinkGeometry const flat({-1, 0, 0}, {1, 0, 0});
        CHECK(power_scatter(flat, {0, 0, 0}, p) == doctest::Approx(1.0));
        CHECK(power_scatter(flat, {0, 1, 0}, p) == doctest::Approx(0.25));
        LinkGeometry const raised({-1, 0, 0.1}, {1, 0, 0.1});
        CHECK(power_scatter(raised, {0, 0, 0}, p) == doctest::Approx(1.0 / (1.01 * 1.01)).epsilon(1e-14));
        CHECK(power_scatter(raised, {0, 0, 0}, p) == doctest::Approx(0.98030).epsilon(1e-5));
    }

    TEST_CASE("reflect kernel values")
    {
        PropagationParams p;
        LinkGeometry const flat({-1, 0, 0}, {1, 0, 0});
        p.n_p = 2;
        CHECK(power_reflect(flat, {0, 0, 0}, p) == doctest::Approx(0.25));
        CHECK(power_reflect(flat, {0, 1, 0}, p) == doctest::Approx(1.0 / 8.0));
        p.n_p = 3;
        CHECK(power_reflect(flat, {0, 0, 0}, p) == doctest::Approx(0.125));
    }

    TEST_CASE("cassini level")
    {
        auto const link = LinkGeometry::standard(0.0);
        CHECK(cassini_level(link, {0, 0, 0}) == doctest::Approx(1.0));
        CHECK(cassini_level(link, {-1, 0, 0}) == 0.0);
        CHECK(cassini_level(link, {0, 1, 0}) == doctest::Approx(2.0));
    }

    TEST_CASE("singular positions and parameter checks")
    {
        PropagationParams const p;
        auto const link = LinkGeometry::standard(0.0);
        CHECK_THROWS_AS(power_scatter(link, {1, 0, 0}, p), Error);
        CHECK_THROWS_AS(power_reflect(link, {-1, 0, 1e-10}, p), Error);
        PropagationParams bad;
        bad.n_p = 0.5;
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = {};
        bad.c_s = -1;
        CHECK_THROWS_AS(bad.validate(), Error);
    }

    TEST_CASE("kernels against an independent distance routine, swap symmetry")
    {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        std::uniform_real_distribution<double> h(0.0, 2.0);
        PropagationParams p;
        p.c_s = 3.5;
        p.c_r = 0.7;
        p.n_p = 2.7;
        for (int i = 0; i < 500; ++i) {
            double const dz = h(rng);
            LinkGeometry const link({u(rng), u(rng), dz}, {u(rng), u(rng), dz});
            Vec3 const x{u(rng), u(rng), 0.0};
            double const a = dist(link.tx(), x);
            double const b = dist(link.rx(), x);
            CHECK(power_scatter(link, x, p) == doctest::Approx(p.c_s / (a * a * b * b)).epsilon(1e-12));
            CHECK(power_reflect(link, x, p) == doctest::Approx(p.c_r / std::pow(a + b, p.n_p)).epsilon(1e-12));
            double const lvl = cassini_level(link, x);
            CHECK(power_scatter(link, x, p) == doctest::Approx(p.c_s / (lvl * lvl)).epsilon(1e-12));
            CHECK(power_scatter(link.swapped(), x, p) == doctest::Approx(power_scatter(link, x, p)).epsilon(1e-14));
            CHECK(power_reflect(link.swapped(), x, p) == doctest::Approx(power_reflect(link, x, p)).epsilon(1e-14));
        }
    }

    TEST_CASE("kernels decrease along rays from the midpoint")
    {
        PropagationParams const p;
        auto const link = LinkGeometry::standard(0.1);
        for (int k = 0; k < 36; ++k) {
            double const phi = 2 * 3.141592653589793 * k / 36;
            double prev_s = INFINITY;
            double prev_r = INFINITY;
            // start outside the segment's unit disc so every step moves away from it
            for (double r = 1.05; r < 30; r *= 1.1) {
                Vec3 const x{r * std::cos(phi), r * std::sin(phi), 0.0};
                double const s = power_scatter(link, x, p);
                double const q = power_reflect(link, x, p);
                CHECK(s < prev_s);
                CHECK(q < prev_r);
                prev_s = s;
                prev_r = q;
            }
        }
    }

    TEST_CASE("reflect on the bisector is c_r / (2a)^n_p")
    {
        PropagationParams p;
        p.c_r = 2.0;
        auto const link = LinkGeometry::standard(0.4);
        for (double np : {1.0, 2.0, 3.3}) {
            p.n_p = np;
            for (double y : {0.0, 0.5, 3.0}) {
                Vec3 const x{0, y, 0};
                double const a = dist(link.tx(), x);
                CHECK(power_reflect(link, x, p) == doctest::Approx(2.0 / std::pow(2 * a, np)).epsilon(1e-14));
            }
        }
    }
}
