// Acceptance run: one PASS/FAIL line per criterion, full-scale settings.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include "rssvar/validation.hpp"

using namespace rssvar;

namespace {

struct Criterion {
    int id;
    std::function<CheckResult(ValidationOptions const&)> check;
    double time_limit_s;  // 0 when the criterion sets none
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print(int id, bool passed, std::string const& name, std::string const& detail, double secs, double limit)
{
    char timing[96];
    if (limit > 0) {
        std::snprintf(timing, sizeof timing, "%.1f s, limit %.0f s", secs, limit);
    } else {
        std::snprintf(timing, sizeof timing, "%.1f s", secs);
    }
    std::cout << (passed ? "PASS" : "FAIL") << " C" << id << ' ' << name << ": " << detail << " [" << timing << "]"
              << std::endl;
}

}  // namespace

int main()
{
    ValidationOptions const opts;  // seed 7, full scale, one worker
    std::vector<Criterion> const criteria{
        {1, check_closed_form, 10.0},
        {2, check_log_gap, 30.0},
        {3, check_ricean_endpoints, 0.0},
        {4, check_variance_regression, 300.0},
        {5, check_monte_carlo_etap, 120.0},
        {6, check_figure_shapes, 0.0},
        {7, check_synthetic_round_trip, 0.0},
    };

    bool all = true;
    std::vector<CheckResult> first_run;
    for (auto const& c : criteria) {
        auto const t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c.check(opts);
        } catch (std::exception const& e) {
            r.id = c.id;
            r.name = "error";
            r.detail = e.what();
        }
        double const secs = seconds_since(t0);
        bool const in_time = c.time_limit_s <= 0 || secs < c.time_limit_s;
        bool const passed = r.passed && in_time;
        print(c.id, passed, r.name, r.detail + (in_time ? "" : "; over the time limit"), secs, c.time_limit_s);
        all = all && passed;
        first_run.push_back(std::move(r));
    }

    // Determinism: the report assembled above, a second serial run and a
    // four-worker run must serialize to the same bytes.
    auto const t0 = std::chrono::steady_clock::now();
    std::string const a = validation_report(opts, first_run).dump(2);
    std::string const b = validation_report(opts, run_checks(opts)).dump(2);
    ValidationOptions par = opts;
    par.workers = 4;
    std::string const c = validation_report(par, run_checks(par)).dump(2);
    bool const same = a == b && a == c;
    print(8, same, "determinism",
          std::string("repeat run ") + (a == b ? "identical" : "differs") + ", workers 4 " +
              (a == c ? "identical" : "differs") + " (" + std::to_string(a.size()) + " bytes)",
          seconds_since(t0), 0.0);
    all = all && same;

    std::cout << (all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << std::endl;
    return all ? 0 : 1;
}
