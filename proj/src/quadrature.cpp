#include "rssvar/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "rssvar/error.hpp"

namespace rssvar {

namespace {

constexpr std::size_t kRulePoints = 15;

struct Segment {
    double lo;
    double hi;
    double value;
    double error;

    bool operator<(Segment const& other) const { return error < other.error; }
};

Segment apply_rule(std::function<double(double)> const& f, double lo, double hi)
{
    using Rule = boost::math::quadrature::gauss_kronrod<double, kRulePoints>;
    double error = 0.0;
    // max_depth = 0: a single Kronrod/Gauss pair, no internal refinement
    double const value = Rule::integrate([&f](double x) { return f(x); }, lo, hi, 0, 0.0, &error);
    return {lo, hi, value, error};
}

}  // namespace

QuadratureResult integrate_adaptive(std::function<double(double)> const& f, double lo, double hi,
                                    double rel_tol, std::size_t max_evaluations, double abs_tol)
{
    if (!(hi > lo)) {
        return {};
    }
    std::priority_queue<Segment> work;
    work.push(apply_rule(f, lo, hi));
    std::size_t evaluations = kRulePoints;
    double value = work.top().value;
    double error = work.top().error;

    while (true) {
        if (!std::isfinite(value)) {
            throw Error(ErrorKind::quadrature_failure, "integrand produced a non-finite value");
        }
        if (error <= std::max(rel_tol * std::abs(value), abs_tol) || error == 0.0) {
            break;
        }
        if (evaluations + 2 * kRulePoints > max_evaluations) {
            std::ostringstream msg;
            msg << "tolerance " << rel_tol << " not reached within " << max_evaluations
                << " evaluations (estimate " << value << ", error " << error << ")";
            throw Error(ErrorKind::quadrature_failure, msg.str());
        }
        Segment const worst = work.top();
        work.pop();
        double const mid = 0.5 * (worst.lo + worst.hi);
        Segment const left = apply_rule(f, worst.lo, mid);
        Segment const right = apply_rule(f, mid, worst.hi);
        evaluations += 2 * kRulePoints;
        work.push(left);
        work.push(right);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
    }

    // Re-sum from the leaves so the result does not carry cancellation drift.
    double total = 0.0;
    double total_error = 0.0;
    std::vector<Segment> leaves;
    leaves.reserve(work.size());
    while (!work.empty()) {
        leaves.push_back(work.top());
        work.pop();
    }
    std::sort(leaves.begin(), leaves.end(), [](Segment const& a, Segment const& b) { return a.lo < b.lo; });
    for (auto const& s : leaves) {
        total += s.value;
        total_error += s.error;
    }
    return {total, total_error, evaluations};
}

QuadratureResult integrate_ray(std::function<double(double)> const& f, QuadratureSettings const& settings)
{
    double const t_max = std::isinf(settings.alpha_cap) ? 1.0 : settings.alpha_cap / (1.0 + settings.alpha_cap);
    auto mapped = [&f](double t) {
        double const one_minus = 1.0 - t;
        return f(t / one_minus) / (one_minus * one_minus);
    };
    return integrate_adaptive(mapped, 0.0, t_max, settings.rel_tol, settings.max_evaluations);
}

}  // namespace rssvar
