#pragma once

#include "radflow/expression.hpp"

#include <limits>
#include <string>
#include <vector>

namespace radflow {

enum class ProfileKind { Euclidean, Hyperbolic, Sphere, Expression, Table };

std::string_view to_string(ProfileKind kind) noexcept;

/// Profile value with its first two derivatives at one radius.
struct ProfileJet {
    double psi = 0.0;
    double dpsi = 0.0;
    double ddpsi = 0.0;
};

struct ManifoldSpec {
    int n = 2;
    ProfileKind kind = ProfileKind::Euclidean;
    std::string expression;          // used when kind == Expression
    std::vector<double> table_r;     // used when kind == Table; starts at 0
    std::vector<double> table_psi;
};

struct Curvatures {
    double K_rad = 0.0;
    double K_perp = 0.0;
    double Ric_rad = 0.0;
    double Ric_perp = 0.0;
    double S = 0.0;
};

struct SmallBallExpansion {
    double vol_approx = 0.0;
    double area_approx = 0.0;
};

enum class Parabolicity { Parabolic, Nonparabolic, Inconclusive };

std::string_view to_string(Parabolicity p) noexcept;

/// Monotone piecewise-cubic interpolant through sampled profile data.
/// Slopes follow the Fritsch–Carlson limiter; the slope at r = 0 is pinned to 1.
class TableProfile {
public:
    TableProfile() = default;
    TableProfile(std::vector<double> r, std::vector<double> psi);

    [[nodiscard]] ProfileJet eval(double r) const;
    [[nodiscard]] double last_knot() const { return r_.back(); }

private:
    std::vector<double> r_;
    std::vector<double> y_;
    std::vector<double> d_;
};

/// An n-dimensional model manifold with metric dr² + ψ(r)² dθ².
///
/// Immutable once built; every query is a pure function of the profile.
class ModelManifold {
public:
    static ModelManifold make(const ManifoldSpec& spec);
    static ModelManifold euclidean(int n);
    static ModelManifold hyperbolic(int n);
    static ModelManifold sphere(int n);
    static ModelManifold from_expression(int n, const std::string& source);
    static ModelManifold from_table(int n, std::vector<double> r, std::vector<double> psi);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] ProfileKind kind() const noexcept { return kind_; }
    [[nodiscard]] double omega() const noexcept { return omega_; }
    /// Right end of the radial domain; infinity for noncompact profiles.
    [[nodiscard]] double domain_end() const noexcept { return r_dom_; }
    [[nodiscard]] bool compact() const noexcept { return r_dom_ < std::numeric_limits<double>::infinity(); }
    [[nodiscard]] const ManifoldSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::string describe() const;

    /// Profile and derivatives; no domain check (callers validate radii).
    [[nodiscard]] ProfileJet profile(double r) const;
    [[nodiscard]] double psi(double r) const { return profile(r).psi; }
    /// Density of the radial measure, ψ(r)^(n-1).
    [[nodiscard]] double density(double r) const;
    /// ψ′² − 1 evaluated without cancellation where the profile allows it.
    [[nodiscard]] double dpsi_sq_minus_one(double r) const;

    /// G(r) = ∫₀ʳ ψ^(n-1) by adaptive quadrature.
    [[nodiscard]] double G(double r) const;
    /// ∫ₐᵇ ψ^(n-1).
    [[nodiscard]] double G_between(double a, double b) const;
    /// G(R_dom⁻); infinite for infinite-volume profiles.
    [[nodiscard]] double G_total() const;
    [[nodiscard]] double radius_of_G(double g) const;

    [[nodiscard]] double volume_ball(double r) const;
    [[nodiscard]] double perimeter_ball(double r) const;
    [[nodiscard]] double radius_of_volume(double V) const;
    [[nodiscard]] double total_volume() const { return omega_ * G_total(); }

    [[nodiscard]] Curvatures curvatures(double r) const;
    [[nodiscard]] Parabolicity is_parabolic() const;

    /// Throws DomainExceeded unless 0 ≤ r < R_dom (r = R_dom allowed for tables).
    void check_radius(double r) const;

private:
    ModelManifold() = default;
    void validate();
    [[nodiscard]] Curvatures curvatures_raw(double r) const;

    ManifoldSpec spec_;
    int n_ = 2;
    ProfileKind kind_ = ProfileKind::Euclidean;
    double omega_ = 0.0;
    double r_dom_ = std::numeric_limits<double>::infinity();
    double g_total_ = std::numeric_limits<double>::quiet_NaN();
    expr::Expr expression_;
    TableProfile table_;
};

/// ωₙ, the area of the unit (n−1)-sphere.
double unit_sphere_area(int n);

/// Truncated small-ball expansions of volume and area in terms of the scalar
/// curvature at the center.
SmallBallExpansion smallball_expansion(double S_at_center, double r, int n);

}  // namespace radflow
