#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "rssvar/error.hpp"
#include "rssvar/etap.hpp"
#include "rssvar/surface.hpp"

using namespace rssvar;

namespace {

std::filesystem::path scratch(std::string const& name)
{
    auto const dir = std::filesystem::temp_directory_path() / "rssvar-surface-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

Scenario base(double dz = 0.1) { return {LinkGeometry::standard(dz), Person(Vec2{0, 0.5}, 0.3), {}, 1.0}; }

std::size_t local_maxima(Cut const& c, std::vector<double> const& x, double near, std::vector<double>& where)
{
    std::size_t n = 0;
    for (std::size_t i = 1; i + 1 < c.value.size(); ++i) {
        if (c.hole[i] || c.hole[i - 1] || c.hole[i + 1]) continue;
        if (c.value[i] > c.value[i - 1] && c.value[i] > c.value[i + 1] && std::abs(std::abs(x[i]) - 1.0) <= near) {
            ++n;
            where.push_back(x[i]);
        }
    }
    return n;
}

}  // namespace

TEST_SUITE("surface")
{
    TEST_CASE("grid spec")
    {
        GridSpec const g{-1, 1, -1, 1, 0.5};
        CHECK(g.nx() == 4);
        CHECK(g.cell_count() == 16);
        CHECK(g.locate({-1, -1}) == 0u);
        CHECK(g.locate({1, 1}) == 15u);  // last edge is closed
        CHECK(g.locate({-0.5, -1}) == 1u);  // half-open interior edges
        CHECK_FALSE(g.locate({1.01, 0}).has_value());
        CHECK_THROWS_AS((GridSpec{0, 1, 0, 1, 0.7}.validate()), Error);
        CHECK_THROWS_AS((GridSpec{0, 1, 0, 1, 1.0}.validate()), Error);
        CHECK_THROWS_AS((GridSpec{0, 1, 0, 1, -0.1}.validate()), Error);
    }

    TEST_CASE("dB surfaces have exactly one 0 dB reference and record ties")
    {
        SurfaceGrid s = SurfaceGrid::filled({-1, 1, -1, 1, 0.5}, 1.0, true);
        s.values[5] = 4.0;
        s.values[9] = 4.0;
        s.values[2] = 8.0;
        s.valid[2] = 0;
        auto const db = to_db(s);
        CHECK(db.metadata["peak_index"] == 5);
        CHECK(db.metadata["peak_ties"] == 2);
        int zeros = 0;
        for (std::size_t i = 0; i < db.values.size(); ++i) {
            if (db.valid[i] && db.values[i] == 0.0) ++zeros;
        }
        CHECK(zeros >= 1);
        CHECK(db.values[5] == 0.0);
        CHECK(db.values[0] == doctest::Approx(10 * std::log10(0.25)));
        CHECK_THROWS_AS(to_db(SurfaceGrid::filled({-1, 1, -1, 1, 0.5}, 0.0, true)), Error);
    }

    TEST_CASE("csv and json round trips")
    {
        auto es = etap_surface(base(), {-1.5, 1.5, -1.5, 1.5, 0.1}, Mechanism::scatter());
        auto const db = es.db();
        auto const a = scratch("a.csv");
        auto const b = scratch("b.csv");
        export_grid(db, a, GridFormat::csv);
        auto const back = import_grid(a, GridFormat::csv);
        export_grid(back, b, GridFormat::csv);
        CHECK(read_text_file(a) == read_text_file(b));
        std::string const text = read_text_file(a);
        CHECK(text.find("x,y,value,valid\n") == 0);
        CHECK(text.find("x,y,value,valid", 1) == std::string::npos);
        CHECK(text.find('\r') == std::string::npos);

        auto const j1 = scratch("a.json");
        auto const j2 = scratch("b.json");
        export_grid(db, j1, GridFormat::json);
        auto const jb = import_grid(j1, GridFormat::json);
        CHECK(jb.values.size() == db.values.size());
        for (std::size_t i = 0; i < db.values.size(); ++i) {
            if (db.valid[i]) CHECK(jb.values[i] == db.values[i]);
        }
        CHECK(jb.metadata == db.metadata);
        export_grid(jb, j2, GridFormat::json);
        CHECK(read_text_file(j1) == read_text_file(j2));

        auto const small = SurfaceGrid::filled({0, 3, 0, 3, 1}, 2.5, true);
        auto const c = scratch("c.csv");
        export_grid(small, c, GridFormat::csv);
        std::istringstream in(read_text_file(c));
        int rows = -1;
        for (std::string line; std::getline(in, line);) ++rows;
        CHECK(rows == 9);

        CHECK_THROWS_AS(export_grid(small, "/nonexistent-dir/x.csv", GridFormat::csv), Error);
        write_text_file(c, "a,b\n1,2\n");
        CHECK_THROWS_AS(import_grid(c, GridFormat::csv), Error);
    }

    TEST_CASE("format_g6")
    {
        CHECK(format_g6(0.1234567) == "0.123457");
        CHECK(format_g6(1e-7) == "1e-07");
        CHECK(std::strtod(format_g6(NAN).c_str(), nullptr) != std::strtod(format_g6(NAN).c_str(), nullptr));
        CHECK(std::isinf(std::strtod(format_g6(-INFINITY).c_str(), nullptr)));
    }

    TEST_CASE("surfaces do not depend on evaluation order or worker count")
    {
        GridSpec const g{-2, 2, -2, 2, 0.2};
        auto const a = etap_surface(base(), g, Mechanism::reflect(), {}, 1).linear();
        auto const b = etap_surface(base(), g, Mechanism::reflect(), {}, 4).linear();
        // cell-by-cell evaluation in a shuffled order
        std::vector<std::size_t> order(g.cell_count());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), std::mt19937_64(2));
        for (std::size_t i : order) {
            CHECK(a.values[i] == b.values[i]);
            auto const c = g.center(i);
            try {
                double const v = etap(base().with_person_at(c), Mechanism::reflect()).value;
                if (a.valid[i]) CHECK(std::abs(v - a.values[i]) <= 1e-9 * std::abs(v));
            } catch (Error const&) {
                CHECK_FALSE(a.valid[i]);
            }
        }
    }

    TEST_CASE("scatter surface peaks on the midline between the nodes")
    {
        auto const db = etap_surface(base(), GridSpec{}, Mechanism::scatter()).db();
        double const px = db.metadata["peak_x"];
        double const py = db.metadata["peak_y"];
        CHECK(std::abs(py) <= 0.05 + 1e-12);
        CHECK(std::abs(px) < 1.0);
    }

    TEST_CASE("n_p sweep: decreasing in n_p away from nodes, global max at smallest n_p")
    {
        QuadratureSettings q;
        q.alpha_cap = 1000;
        std::vector<double> const nps{2, 3, 4, 5};
        GridLine const line{-2, 2, 0.05, 0.1};
        auto const s = sweep_np(base(), line, nps, q);
        REQUIRE(s.cuts.size() == 4);
        double best = -INFINITY;
        std::size_t best_cut = 99;
        for (std::size_t k = 0; k < 4; ++k) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!s.cuts[k].hole[i] && !s.cuts[k].flags[i] && s.cuts[k].db[i] > best) {
                    best = s.cuts[k].db[i];
                    best_cut = k;
                }
                if (k > 0 && std::abs(std::abs(s.x[i]) - 1.0) > 0.2 && !s.cuts[k].hole[i] && !s.cuts[k - 1].hole[i]) {
                    CHECK(s.cuts[k].value[i] <= s.cuts[k - 1].value[i]);
                }
            }
        }
        CHECK(best_cut == 0);
        CHECK(best == doctest::Approx(0.0).epsilon(1e-12));

        auto const single = sweep_np(base(), line, std::vector<double>{3.0});
        auto plain = base();
        plain.params.n_p = 3.0;
        for (std::size_t i = 0; i < single.x.size(); i += 10) {
            if (single.cuts[0].hole[i]) continue;
            double const v = etap_reflect(plain.with_person_at({single.x[i], 0.1})).value;
            CHECK(single.cuts[0].value[i] == doctest::Approx(v).epsilon(1e-12));
        }
        CHECK_THROWS_AS(sweep_np(base(), line, std::vector<double>{}), Error);
    }

    TEST_CASE("dz sweeps: reflection peaks move from the nodes to the midpoint, scattering stays central")
    {
        GridLine const line{-2, 2, 0.01, 0.1};
        auto const r = sweep_dz(base(), line, std::vector<double>{0.1, 2.4}, Mechanism::reflect());
        std::vector<double> where;
        CHECK(local_maxima(r.cuts[0], r.x, 0.2, where) == 2);
        if (where.size() == 2) CHECK(where[0] * where[1] < 0);
        std::size_t arg = 0;
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            if (r.cuts[1].value[i] > r.cuts[1].value[arg]) arg = i;
        }
        CHECK(std::abs(r.x[arg]) <= 0.01);

        auto const s = sweep_dz(base(), line, std::vector<double>{0.5, 1.0, 2.0, 3.0}, Mechanism::scatter());
        for (auto const& c : s.cuts) {
            std::size_t am = 0;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!c.hole[i] && !c.flags[i] && c.value[i] > c.value[am]) am = i;
            }
            CHECK(std::abs(s.x[am]) <= 0.01);
        }
    }

    TEST_CASE("cassini surface")
    {
        auto const link = LinkGeometry::standard(0.0);
        auto const s = cassini_surface(link, {-2, 2, -2, 2, 0.1}, 100.0);
        GridSpec const g = s.spec;
        for (std::size_t iy = 0; iy < g.ny(); ++iy) {
            for (std::size_t ix = 0; ix < g.nx(); ++ix) {
                std::size_t const i = g.index(ix, iy);
                std::size_t const mx = g.index(g.nx() - 1 - ix, iy);
                std::size_t const my = g.index(ix, g.ny() - 1 - iy);
                CHECK(s.values[i] == doctest::Approx(s.values[mx]).epsilon(1e-12));
                CHECK(s.values[i] == doctest::Approx(s.values[my]).epsilon(1e-12));
            }
        }
        auto const mid = cassini_surface(link, {-0.5, 0.5, -0.5, 0.5, 0.5}, 100.0);
        // cell centres at (+-0.25, +-0.25); check the closed form there and at the midpoint itself
        double const a2 = 0.75 * 0.75 + 0.0625;
        double const b2 = 1.25 * 1.25 + 0.0625;
        CHECK(mid.values[0] == doctest::Approx(100.0 / (a2 * b2)));
        CHECK(power_scatter(link, {0, 0, 0}, {100.0, 1.0, 3.0}) == doctest::Approx(100.0 / std::pow(1.0, 4)));
        auto const hole = cassini_surface(link, {-1.05, 1.05, -0.35, 0.35, 0.1}, 1.0);
        std::size_t holes = 0;
        for (auto v : hole.valid) holes += v == 0;
        CHECK(holes == 2);
    }
}
