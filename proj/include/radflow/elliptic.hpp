#pragma once

#include "radflow/nonlinearity.hpp"
#include "radflow/radial.hpp"

#include <vector>

namespace radflow {

enum class EllipticMethod {
    /// Shooting on the pole value with bisection and fixed-step RK4.
    Shooting,
    /// Mass-lumped piecewise-linear Galerkin scheme solved by damped Newton. Stable for
    /// stiff absorption, where shooting loses all precision.
    Galerkin,
};

struct EllipticOptions {
    EllipticMethod method = EllipticMethod::Shooting;
    int max_iterations = 200;     // Newton iterations or bisection steps
    int shooting_substeps = 8;    // RK4 steps per grid cell
    int bracket_doublings = 60;   // cap on the pole-value bracket search
};

struct EllipticSolution {
    RadialFunction v;
    double alpha = 0.0;     // v(0)
    /// Max over nodes of the integral identity ωψⁿ⁻¹(r)v′(r) = ∫_{B_r}(β(v) − f) dV.
    /// Shooting integrates the right side along the trajectory; Galerkin uses its discrete
    /// form |k_j(v_j − v_{j+1}) + Σ_{i≤j} W_i(β(v_i) − f_i)|.
    double residual = 0.0;
    std::vector<double> residuals;      // per node
    std::vector<double> bisection;      // |v(R)| per bisection step (Shooting)
    double boundary_mismatch = 0.0;     // |v(R)| before clamping (Shooting)
    int iterations = 0;
};

/// −Δv + β(v) = f on B_R with v(R) = 0, for the radial datum f on its grid.
EllipticSolution solve_semilinear(const Beta& beta, const RadialFunction& f, const EllipticOptions& opts = {});

struct StepResult {
    RadialFunction w;       // φₗ⁻¹(v): the next iterate of the time discretisation
    RadialFunction v;       // φ(w)
    double residual = 0.0;  // discrete integral identity with β(v) = w/h
    int iterations = 0;
};

/// One implicit step: w − h Δφ(w) = w_prev on B_R with φ(w) = 0 on ∂B_R.
/// Requires a strictly increasing φ (regularize first otherwise).
StepResult discrete_step(const Nonlinearity& phi, double h, const RadialFunction& w_prev, int max_iterations = 200);

struct EllipticConcentration {
    ConcentrationReport report;  // w⋆ against w̄
    /// max_r ∫_{B_r} (φₗ⁻¹(v⋆) − φₗ⁻¹(v̄)) dV, equal to −min margin of the report.
    double A_max = 0.0;
    RadialFunction w;
    RadialFunction w_bar;
};

/// Throws PreconditionOrderFails unless f ≺ f_bar within the comparison tolerance.
EllipticConcentration elliptic_concentration_check(const Nonlinearity& phi, double h, const RadialFunction& f,
                                                   const RadialFunction& f_bar,
                                                   const ConcentrationOptions& opts = {});

/// min of −v′ over cells starting at r ≥ 2·(max spacing). Throws NotApplicable unless
/// f is nonincreasing and not identically zero.
double hopf_strict_decrease_check(const RadialFunction& v, const RadialFunction& f);

/// c_R = (n−1)·max over 1024 samples of ((ψ″ψ − ψ′²)/ψ²)⁺ on (0, R], plus 1.
double monotonicity_threshold(const ModelManifold& m, double R);

}  // namespace radflow
