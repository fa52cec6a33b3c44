#pragma once

#include <array>
#include <functional>

namespace radflow::quad {

/// Adaptive Gauss–Kronrod (15-point) integral of f over [a, b]; stops once the
/// error estimate is below max(rel_tol·∫|f|, abs_tol).
double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13,
                double abs_tol = 1e-290);

/// Root of f on [lo, hi] where f(lo), f(hi) differ in sign (or vanish), by TOMS 748.
double solve_bracketed(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-14);

/// 10-point Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
    static constexpr int kPoints = 10;
    std::array<double, kPoints> x{};
    std::array<double, kPoints> w{};
};

const GaussRule& gauss_rule();

/// Fixed Gauss–Legendre integral; exact for polynomials of degree 19.
template <class F>
double gauss(F&& f, double a, double b) {
    if (b == a) return 0.0;
    const GaussRule& g = gauss_rule();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < GaussRule::kPoints; ++i) s += g.w[i] * f(mid + half * g.x[i]);
    return s * half;
}

}  // namespace radflow::quad
