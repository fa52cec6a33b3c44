#include "radflow/quadrature.hpp"

#include "radflow/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace radflow::quad {

double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol) {
    if (b <= a) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    // Integrate over the unit interval with the Jacobian folded into the integrand:
    // the library's rounding floor is relative to the unscaled integral, which
    // would otherwise stall refinement on short intervals.
    const double len = b - a;
    auto g = [&](double t) { return f(a + len * t) * len; };
    double err = 0.0, l1 = 0.0;
    const double coarse = GK::integrate(g, 0.0, 1.0, 0, rel_tol, &err, &l1);
    if (l1 <= abs_tol || err <= std::max(rel_tol * l1, abs_tol)) return coarse;
    return GK::integrate(g, 0.0, 1.0, 18, std::max(rel_tol, abs_tol / l1), &err);
}

double solve_bracketed(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
    const double flo = f(lo);
    if (flo == 0.0) return lo;
    const double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) fail(ErrorCode::NonConvergence, "root is not bracketed");
    std::uintmax_t iters = 200;
    const double abs_floor = std::numeric_limits<double>::min() * 16;
    auto tol = [rel_tol, abs_floor](double x, double y) {
        return std::abs(x - y) <= std::max(rel_tol * std::max(std::abs(x), std::abs(y)), abs_floor);
    };
    auto [x0, x1] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (x0 + x1);
}

const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, GaussRule::kPoints>;
        const auto& abscissa = G::abscissa();
        const auto& weights = G::weights();
        GaussRule r;
        int k = 0;
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            r.x[k] = abscissa[i];
            r.w[k++] = weights[i];
            if (abscissa[i] != 0.0) {
                r.x[k] = -abscissa[i];
                r.w[k++] = weights[i];
            }
        }
        return r;
    }();
    return rule;
}

}  // namespace radflow::quad
