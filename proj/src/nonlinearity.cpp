#include "radflow/nonlinearity.hpp"

#include "radflow/error.hpp"
#include "radflow/quadrature.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace radflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest u ≥ 0 with pred(u) true for a monotone predicate, by bracket doubling and bisection.
template <class Pred>
double first_true(Pred pred) {
    if (pred(0.0)) return 0.0;
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (!pred(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 1100) fail(ErrorCode::NonConvergence, "inverse bracket does not close");
    }
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

Nonlinearity Nonlinearity::linear() {
    Nonlinearity n;
    n.kind_ = NonlinearityKind::Linear;
    return n;
}

Nonlinearity Nonlinearity::porous_medium(double m) {
    if (!(m >= 1.0) || !std::isfinite(m)) fail(ErrorCode::InvalidArgument, "porous medium exponent must be ≥ 1");
    if (m == 1.0) return linear();
    Nonlinearity n;
    n.kind_ = NonlinearityKind::Porous;
    n.exponent_ = m;
    return n;
}

Nonlinearity Nonlinearity::stefan(double threshold) {
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        fail(ErrorCode::InvalidArgument, "stefan threshold must be positive");
    }
    Nonlinearity n;
    n.kind_ = NonlinearityKind::Stefan;
    n.threshold_ = threshold;
    n.strict_ = false;
    return n;
}

Nonlinearity Nonlinearity::from_expression(const std::string& source) {
    Nonlinearity n;
    n.kind_ = NonlinearityKind::Expression;
    n.source_ = source;
    n.expression_ = expr::Expr::parse(source, "u");
    n.validate_expression();
    return n;
}

void Nonlinearity::validate_expression() {
    if (std::abs(expression_.eval(0.0)) > 1e-12) fail(ErrorCode::InvalidArgument, "nonlinearity must vanish at 0");
    constexpr int kSamples = 400;
    constexpr double kRange = 100.0;
    double prev = 0.0;
    bool strict = true;
    for (int i = 1; i <= kSamples; ++i) {
        const double u = kRange * i / kSamples;
        const double v = expression_.eval(u);
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "nonlinearity is not finite on [0, 100]");
        if (v < prev - 1e-12 * (1.0 + std::abs(prev))) fail(ErrorCode::InvalidArgument, "nonlinearity decreases");
        if (!(v > prev)) strict = false;
        prev = v;
    }
    if (!(prev > 0.0)) fail(ErrorCode::InvalidArgument, "nonlinearity is constant");
    strict_ = strict;
}

std::string Nonlinearity::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case NonlinearityKind::Linear: os << "linear"; break;
        case NonlinearityKind::Porous: os << "porous_medium(m=" << exponent_ << ")"; break;
        case NonlinearityKind::Stefan: os << "stefan(threshold=" << threshold_ << ")"; break;
        case NonlinearityKind::Expression: os << "expression(" << source_ << ")"; break;
    }
    if (k_ > 0) os << " regularized(k=" << k_ << ")";
    return os.str();
}

double Nonlinearity::phi_pos(double u) const {
    switch (kind_) {
        case NonlinearityKind::Linear: return u;
        case NonlinearityKind::Porous: {
            if (k_ == 0) return std::pow(u, exponent_);
            const double core = u <= cut_ ? std::pow(u, exponent_) : std::pow(cut_, exponent_) + k_ * (u - cut_);
            return eps_ * u + core;
        }
        case NonlinearityKind::Stefan: {
            const double c = threshold_;
            if (k_ == 0) return std::max(0.0, u - c);
            const double d = cut_;
            double s = 0.0;
            if (u >= c + 0.5 * d) {
                s = u - c;
            } else if (u > c - 0.5 * d) {
                const double t = u - c + 0.5 * d;
                s = t * t / (2.0 * d);
            }
            return eps_ * u + s;
        }
        case NonlinearityKind::Expression: return eps_ * u + expression_.eval(u);
    }
    return 0.0;
}

double Nonlinearity::dphi_pos(double u) const {
    switch (kind_) {
        case NonlinearityKind::Linear: return 1.0;
        case NonlinearityKind::Porous: {
            const double m = exponent_;
            if (k_ == 0) return m * std::pow(u, m - 1.0);
            return eps_ + (u <= cut_ ? m * std::pow(u, m - 1.0) : static_cast<double>(k_));
        }
        case NonlinearityKind::Stefan: {
            const double c = threshold_;
            if (k_ == 0) return u > c ? 1.0 : 0.0;
            const double d = cut_;
            double s = 0.0;
            if (u >= c + 0.5 * d) {
                s = 1.0;
            } else if (u > c - 0.5 * d) {
                s = (u - c + 0.5 * d) / d;
            }
            return eps_ + s;
        }
        case NonlinearityKind::Expression: return eps_ + expression_.eval_jet(u).d1;
    }
    return 0.0;
}

double Nonlinearity::Phi_pos(double u) const {
    switch (kind_) {
        case NonlinearityKind::Linear: return 0.5 * u * u;
        case NonlinearityKind::Porous: {
            const double m = exponent_;
            if (k_ == 0) return std::pow(u, m + 1.0) / (m + 1.0);
            double core = 0.0;
            if (u <= cut_) {
                core = std::pow(u, m + 1.0) / (m + 1.0);
            } else {
                const double t = u - cut_;
                core = std::pow(cut_, m + 1.0) / (m + 1.0) + std::pow(cut_, m) * t + 0.5 * k_ * t * t;
            }
            return 0.5 * eps_ * u * u + core;
        }
        case NonlinearityKind::Stefan: {
            const double c = threshold_;
            if (k_ == 0) {
                const double t = std::max(0.0, u - c);
                return 0.5 * t * t;
            }
            const double d = cut_;
            double s = 0.0;
            if (u >= c + 0.5 * d) {
                const double t = u - c;
                s = d * d / 6.0 + 0.5 * (t * t - 0.25 * d * d);
            } else if (u > c - 0.5 * d) {
                const double t = u - c + 0.5 * d;
                s = t * t * t / (6.0 * d);
            }
            return 0.5 * eps_ * u * u + s;
        }
        case NonlinearityKind::Expression:
            return 0.5 * eps_ * u * u + quad::adaptive([this](double s) { return expression_.eval(s); }, 0.0, u);
    }
    return 0.0;
}

double Nonlinearity::phi(double u) const { return u < 0.0 ? -phi_pos(-u) : phi_pos(u); }

double Nonlinearity::dphi(double u) const { return dphi_pos(std::abs(u)); }

double Nonlinearity::Phi(double u) const { return Phi_pos(std::abs(u)); }

double Nonlinearity::ell() const {
    if (kind_ != NonlinearityKind::Expression || k_ > 0) return kInf;
    double prev = phi_pos(1.0);
    for (int j = 1; j <= 60; ++j) {
        const double v = phi_pos(std::ldexp(1.0, j));
        if (!std::isfinite(v)) return kInf;
        if (std::abs(v - prev) <= 1e-12 * std::abs(v) && j > 10) return v;
        prev = v;
    }
    return kInf;
}

bool Nonlinearity::strictly_increasing() const { return strict_ || k_ > 0; }

double Nonlinearity::phi_inv_left(double rho) const {
    if (!(rho >= 0.0) || !(rho < ell())) fail(ErrorCode::InvalidArgument, "pseudo-inverse argument outside [0, ℓ)");
    if (rho == 0.0) return 0.0;
    if (k_ == 0) {
        switch (kind_) {
            case NonlinearityKind::Linear: return rho;
            case NonlinearityKind::Porous: return std::pow(rho, 1.0 / exponent_);
            case NonlinearityKind::Stefan: return threshold_ + rho;
            default: break;
        }
    }
    if (strictly_increasing()) {
        double hi = 1.0;
        for (int guard = 0; phi_pos(hi) < rho; ++guard) {
            if (guard > 1100) fail(ErrorCode::NonConvergence, "inverse bracket does not close");
            hi *= 2.0;
        }
        return quad::solve_bracketed([&](double u) { return phi_pos(u) - rho; }, 0.0, hi, 1e-15);
    }
    return first_true([&](double u) { return phi_pos(u) >= rho; });
}

double Nonlinearity::phi_inv_right(double rho) const {
    if (!(rho >= 0.0) || !(rho < ell())) fail(ErrorCode::InvalidArgument, "pseudo-inverse argument outside [0, ℓ)");
    if (strictly_increasing()) return phi_inv_left(rho);
    if (kind_ == NonlinearityKind::Stefan && k_ == 0) return threshold_ + rho;
    return first_true([&](double u) { return phi_pos(u) > rho; });
}

Nonlinearity Nonlinearity::regularize(int k) const {
    if (k < 1) fail(ErrorCode::InvalidArgument, "regularization index must be at least 1");
    if (k_ > 0) fail(ErrorCode::InvalidArgument, "nonlinearity is already regularized");
    Nonlinearity n = *this;
    n.k_ = k;
    switch (kind_) {
        case NonlinearityKind::Linear: n.eps_ = 0.0; break;
        case NonlinearityKind::Porous:
            n.eps_ = 1.0 / (k + 1.0);
            n.cut_ = std::pow(k / exponent_, 1.0 / (exponent_ - 1.0));
            break;
        case NonlinearityKind::Stefan:
            n.eps_ = 1.0 / (k + 1.0);
            n.cut_ = std::min(1.0 / k, threshold_);
            break;
        case NonlinearityKind::Expression: n.eps_ = 1.0 / (k + 1.0); break;
    }
    n.strict_ = true;
    return n;
}

// -------------------------------------------------------------------- Beta

Beta Beta::zero() {
    Beta b;
    b.beta = [](double) { return 0.0; };
    b.dbeta = [](double) { return 0.0; };
    b.lipschitz_bound = 0.0;
    b.inf_derivative = 0.0;
    b.label = "zero";
    return b;
}

Beta Beta::linear(double c) {
    if (!(c >= 0.0)) fail(ErrorCode::InvalidArgument, "linear absorption needs c ≥ 0");
    Beta b;
    b.beta = [c](double v) { return c * v; };
    b.dbeta = [c](double) { return c; };
    b.lipschitz_bound = c;
    b.inf_derivative = c;
    b.label = "linear";
    return b;
}

Beta Beta::power(double c, double p) {
    if (!(c >= 0.0) || !(p >= 1.0)) fail(ErrorCode::InvalidArgument, "power absorption needs c ≥ 0, p ≥ 1");
    Beta b;
    b.beta = [c, p](double v) { return c * std::copysign(std::pow(std::abs(v), p), v); };
    b.dbeta = [c, p](double v) { return c * p * std::pow(std::abs(v), p - 1.0); };
    if (p == 1.0) b.lipschitz_bound = c;
    b.inf_derivative = p == 1.0 ? c : 0.0;
    b.label = "power";
    return b;
}

Beta Beta::from_nonlinearity(const Nonlinearity& phi, double h) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "time step must be positive");
    Beta b;
    b.beta = [phi, h](double v) { return std::copysign(phi.phi_inv_left(std::abs(v)), v) / h; };
    b.dbeta = [phi, h](double v) {
        const double d = phi.dphi(phi.phi_inv_left(std::abs(v)));
        return d > 0.0 ? 1.0 / (h * d) : kInf;
    };
    b.label = "inverse(" + phi.describe() + ")";
    return b;
}

double Beta::B(double v) const {
    if (v == 0.0) return 0.0;
    return quad::adaptive(beta, 0.0, v);
}

}  // namespace radflow
