#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

namespace rssvar {

struct ValidationOptions {
    std::uint64_t seed = 7;
    unsigned workers = 1;
    bool quick = false;  // smaller sample sizes; thresholds unchanged

    double closed_form_tol = 1e-6;  // relative, closed form vs quadrature
    double gap_agreement_db = 0.01;  // Monte Carlo vs digamma log moment
    double mc_ratio_lo = 0.85;
    double mc_ratio_hi = 1.15;
    double min_r2 = 0.9;
    double min_spearman = 0.7;
};

nlohmann::json to_json(ValidationOptions const& o);

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    nlohmann::json measured = nlohmann::json::object();
};

void to_json(nlohmann::json& j, CheckResult const& c);

CheckResult check_closed_form(ValidationOptions const& o);
CheckResult check_log_gap(ValidationOptions const& o);
CheckResult check_ricean_endpoints(ValidationOptions const& o);
CheckResult check_variance_regression(ValidationOptions const& o);
CheckResult check_monte_carlo_etap(ValidationOptions const& o);
CheckResult check_figure_shapes(ValidationOptions const& o);
CheckResult check_synthetic_round_trip(ValidationOptions const& o);

/// Runs the checks whose ids are listed (all of 1..7 when empty).
std::vector<CheckResult> run_checks(ValidationOptions const& o, std::vector<int> const& ids = {});

/// Report with options and per-check results; contains no timings or paths,
/// so it is byte-identical for equal options regardless of worker count.
nlohmann::json validation_report(ValidationOptions const& o, std::vector<CheckResult> const& results);

}  // namespace rssvar
