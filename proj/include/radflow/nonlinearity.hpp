#pragma once

#include "radflow/expression.hpp"

#include <functional>
#include <optional>
#include <string>

namespace radflow {

enum class NonlinearityKind { Linear, Porous, Stefan, Expression };

/// A filtration nonlinearity φ: continuous, nondecreasing, nonconstant on [0, ∞)
/// with φ(0) = 0. Negative arguments use the odd extension φ(−u) = −φ(u).
class Nonlinearity {
public:
    /// φ(u) = u.
    static Nonlinearity linear();
    /// φ(u) = u^m with m ≥ 1.
    static Nonlinearity porous_medium(double m);
    /// φ(u) = (u − threshold)⁺.
    static Nonlinearity stefan(double threshold = 1.0);
    /// φ given as an expression in the variable u.
    static Nonlinearity from_expression(const std::string& source);

    [[nodiscard]] NonlinearityKind kind() const noexcept { return kind_; }
    [[nodiscard]] double exponent() const noexcept { return exponent_; }
    [[nodiscard]] double threshold() const noexcept { return threshold_; }
    /// Regularization index k, or 0 for the plain nonlinearity.
    [[nodiscard]] int regularization() const noexcept { return k_; }
    [[nodiscard]] std::string describe() const;

    [[nodiscard]] double phi(double u) const;
    [[nodiscard]] double dphi(double u) const;
    /// Φ(u) = ∫₀ᵘ φ.
    [[nodiscard]] double Phi(double u) const;
    /// ℓ = lim φ(u) as u → ∞.
    [[nodiscard]] double ell() const;
    /// Smallest u ≥ 0 with φ(u) = ρ, for 0 ≤ ρ < ℓ.
    [[nodiscard]] double phi_inv_left(double rho) const;
    /// Largest u ≥ 0 with φ(u) = ρ, for 0 ≤ ρ < ℓ.
    [[nodiscard]] double phi_inv_right(double rho) const;
    [[nodiscard]] bool strictly_increasing() const;

    /// C¹ nonlinearity φₖ with φₖ(0) = 0 and 1/(k+1) ≤ φₖ′ ≤ k+1 that tends to φ
    /// locally uniformly as k → ∞. Expression nonlinearities only gain the lower bound.
    [[nodiscard]] Nonlinearity regularize(int k) const;

private:
    Nonlinearity() = default;
    void validate_expression();
    [[nodiscard]] double phi_pos(double u) const;
    [[nodiscard]] double dphi_pos(double u) const;
    [[nodiscard]] double Phi_pos(double u) const;

    NonlinearityKind kind_ = NonlinearityKind::Linear;
    double exponent_ = 1.0;
    double threshold_ = 0.0;
    int k_ = 0;
    double eps_ = 0.0;       // 1/(k+1) when regularized
    double cut_ = 0.0;       // porous: slope cap point; stefan: smoothing width
    expr::Expr expression_;
    std::string source_;
    bool strict_ = true;
};

/// Absorption term β: continuous, nondecreasing, β(0) = 0. Negative arguments are
/// passed through unchanged, so β must be defined on the whole line.
struct Beta {
    std::function<double(double)> beta;
    std::function<double(double)> dbeta;
    std::optional<double> lipschitz_bound;
    std::optional<double> inf_derivative;
    std::string label;

    static Beta zero();
    /// β(v) = c·v.
    static Beta linear(double c);
    /// β(v) = c·|v|^(p−1)·v with p ≥ 1.
    static Beta power(double c, double p);
    /// β(v) = φₗ⁻¹(v)/h, extended oddly to negative v.
    static Beta from_nonlinearity(const Nonlinearity& phi, double h);

    /// B(v) = ∫₀ᵛ β.
    [[nodiscard]] double B(double v) const;
};

}  // namespace radflow
