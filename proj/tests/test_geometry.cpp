#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rssvar/error.hpp"
#include "rssvar/geometry.hpp"

using namespace rssvar;

namespace {

double angle_between(Vec3 u, Vec3 v)
{
    // atan2 of |u x v| and u.v, independent of the library's formula
    Vec3 const c{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
    return std::atan2(std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z), u.x * v.x + u.y * v.y + u.z * v.z);
}

}  // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("scalars for the perpendicular bisector")
    {
        LinkGeometry const link({-1, 0, 0}, {1, 0, 0});
        auto const g = geometry_scalars(link, Person(Vec2{0, 1}, 0.3));
        CHECK(g.theta == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
        CHECK(g.a == doctest::Approx(std::sqrt(2.0)));
        CHECK(g.b == doctest::Approx(std::sqrt(2.0)));
        CHECK(g.d_plus == doctest::Approx(std::sqrt(2.0) / 2));
        CHECK(std::isinf(g.d_minus));
    }

    TEST_CASE("collinear midpoint gives theta 0")
    {
        LinkGeometry const link({-1, 0, 0}, {1, 0, 0});
        auto const g = geometry_scalars(link, Person(Vec2{0, 0}, 0.3));
        CHECK(g.theta == doctest::Approx(0.0));
        CHECK(g.a == doctest::Approx(1.0));
        CHECK(g.d_plus == doctest::Approx(0.5));
    }

    TEST_CASE("theta with raised nodes matches a brute-force angle")
    {
        LinkGeometry const link({-1, 0, 0.1}, {1, 0, 0.1});
        auto const g = geometry_scalars(link, Person(Vec2{0, 1}, 0.3));
        CHECK(g.a == doctest::Approx(std::sqrt(2.01)));
        CHECK(g.theta == doctest::Approx(std::acos(-0.01 / 2.01)).epsilon(1e-14));
        Vec3 const xo{0, 1, 0};
        CHECK(g.theta == doctest::Approx(angle_between(link.rx() - xo, xo - link.tx())).epsilon(1e-14));
    }

    TEST_CASE("random geometries: swap, harmonic bounds, brute-force angle")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        std::uniform_real_distribution<double> h(0.0, 3.0);
        for (int i = 0; i < 500; ++i) {
            double const dz = h(rng);
            LinkGeometry const link({u(rng), u(rng), dz}, {u(rng), u(rng), dz});
            Person const person(Vec2{u(rng), u(rng)}, 0.3);
            auto const g = geometry_scalars(link, person);
            auto const s = geometry_scalars(link.swapped(), person);
            CHECK(s.a == doctest::Approx(g.b).epsilon(1e-14));
            CHECK(s.b == doctest::Approx(g.a).epsilon(1e-14));
            CHECK(s.theta == doctest::Approx(g.theta).epsilon(1e-12));
            CHECK(s.d_plus == doctest::Approx(g.d_plus).epsilon(1e-14));
            double const lo = std::min(g.a, g.b);
            CHECK(g.d_plus <= lo * (1 + 1e-15));
            CHECK(g.d_plus >= lo / 2 * (1 - 1e-15));
            CHECK(g.theta >= 0.0);
            CHECK(g.theta <= std::numbers::pi);
            Vec3 const xo = person.center();
            CHECK(g.theta == doctest::Approx(angle_between(link.rx() - xo, xo - link.tx())).epsilon(1e-9));
        }
    }

    TEST_CASE("degenerate inputs")
    {
        LinkGeometry const link({-1, 0, 0}, {1, 0, 0});
        CHECK_THROWS_AS(geometry_scalars(link, Person(Vec2{-1, 0}, 0.3)), Error);
        CHECK_THROWS_AS(LinkGeometry({0, 0, 0}, {0, 0, 0}), Error);
        CHECK_THROWS_AS(LinkGeometry({0, 0, 0}, {1, 0, 1}), Error);
        CHECK_THROWS_AS(Person(Vec2{0, 0}, 0.0), Error);
        CHECK_THROWS_AS(Person(Vec3{0, 0, 1}, 0.3), Error);
        try {
            geometry_scalars(link, Person(Vec2{1, 0}, 0.3));
        } catch (Error const& e) {
            CHECK(e.kind() == ErrorKind::degenerate_geometry);
        }
    }

    TEST_CASE("shadow width by similar triangles")
    {
        CHECK(shadow_width({3, 4, 0.5}, Person(Vec2{0, 0}, 0.37), 0.0) == 0.37);
        CHECK(shadow_width({1, 0, 0}, Person(Vec2{0, 0}, 0.2), 1.0) == doctest::Approx(0.4));
        // apex 2 m away, 3 m past the person: total distance 5, ratio 5/2
        Person const p(Vec2{0, 0}, 0.3);
        CHECK(shadow_width({0, 2, 0}, p, 3.0) == doctest::Approx(0.3 * 5.0 / 2.0));
        CHECK_THROWS_AS(shadow_width({0, 0, 0}, p, 1.0), Error);
        CHECK_THROWS_AS(shadow_width({0, 2, 0}, p, -1.0), Error);
    }

    TEST_CASE("segment shadowing examples")
    {
        CHECK(segment_shadowed({-1, 0, 0.1}, {2, 0, 0}, Person(Vec2{0.5, 0}, 0.2)));
        CHECK_FALSE(segment_shadowed({-1, 0, 0.1}, {2, 0, 0}, Person(Vec2{0, 5}, 0.2)));
        // person offset exactly D/2 from the segment (0,0)-(1,1), on a dyadic grid
        Vec2 const c{0.5 + 0.125, 0.5 - 0.125};
        double const exact = oracle::point_segment_distance({0, 0}, {1, 1}, c);
        CHECK(exact == doctest::Approx(0.25 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(segment_shadowed({0, 0, 0.1}, {1, 1, 0}, Person(c, 2 * exact)));
        CHECK_FALSE(segment_shadowed({0, 0, 0.1}, {1, 1, 0}, Person(c, 2 * exact * (1 - 1e-9))));
        // closest approach outside the segment range does not count
        CHECK_FALSE(segment_shadowed({0, 0, 0}, {1, 0, 0}, Person(Vec2{1.5, 0.05}, 0.2)));
    }

    TEST_CASE("segment shadowing agrees with a distance oracle and is mirror symmetric")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        int disagreements = 0;
        for (int i = 0; i < 20000; ++i) {
            Vec3 const e{u(rng), u(rng), 0.3};
            Vec3 const s{u(rng), u(rng), 0.0};
            Vec2 const c{u(rng), u(rng)};
            double const dia = 0.4;
            bool const got = segment_shadowed(e, s, Person(c, dia));
            bool const want = oracle::point_segment_distance(plan(e), plan(s), c) <= dia / 2;
            disagreements += got != want;
            bool const mirrored = segment_shadowed({e.x, -e.y, e.z}, {s.x, -s.y, 0.0}, Person(Vec2{c.x, -c.y}, dia));
            CHECK(mirrored == got);
        }
        CHECK(disagreements == 0);
    }

    TEST_CASE("normalization examples")
    {
        auto [t, pts] = normalize_coordinates({3, 4}, {7, 4}, std::vector<Vec2>{{5, 6}, {3, 4}, {7, 4}});
        CHECK(pts[0].x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(pts[0].y == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(std::abs(pts[1].x - 1.0) < 1e-12);
        CHECK(std::abs(pts[1].y) < 1e-12);
        CHECK(std::abs(pts[2].x + 1.0) < 1e-12);
        CHECK(std::abs(pts[2].y) < 1e-12);
        CHECK(t.scale == doctest::Approx(0.5));
        CHECK(t.determinant() > 0);

        auto const id = link_normalization({1, 0}, {-1, 0});
        Vec2 const p = id.apply({0.3, -0.7});
        CHECK(std::abs(p.x - 0.3) < 1e-12);
        CHECK(std::abs(p.y + 0.7) < 1e-12);

        // orientation-preserving: (1,1) lands at (1,0) for tx=(0,0), rx=(0,2)
        auto const q = link_normalization({0, 0}, {0, 2}).apply({1, 1});
        CHECK(q.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::abs(std::abs(q.y) - 1.0) < 1e-12);
        Vec2 const oq = oracle::normalize({0, 0}, {0, 2}, {1, 1});
        CHECK(std::abs(q.x - oq.x) < 1e-12);
        CHECK(std::abs(q.y - oq.y) < 1e-12);

        CHECK_THROWS_AS(link_normalization({1, 1}, {1, 1}), Error);
    }

    TEST_CASE("normalization matches the complex-number oracle, inverts and is idempotent")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        for (int i = 0; i < 1000; ++i) {
            Vec2 const tx{u(rng), u(rng)};
            Vec2 const rx{u(rng), u(rng)};
            Vec2 const p{u(rng), u(rng)};
            auto const t = link_normalization(tx, rx);
            Vec2 const q = t.apply(p);
            Vec2 const o = oracle::normalize(tx, rx, p);
            CHECK(std::abs(q.x - o.x) < 1e-9);
            CHECK(std::abs(q.y - o.y) < 1e-9);
            Vec2 const back = t.invert(q);
            CHECK(std::abs(back.x - p.x) < 1e-9);
            CHECK(std::abs(back.y - p.y) < 1e-9);
            CHECK(t.determinant() > 0);
            auto const again = link_normalization(t.apply(tx), t.apply(rx));
            CHECK(std::abs(again.scale - 1.0) < 1e-12);
            CHECK(std::abs(again.sin_angle) < 1e-12);
            CHECK(std::abs(again.origin.x) < 1e-12);
            CHECK(std::abs(again.origin.y) < 1e-12);
        }
    }
}
