#pragma once

#include "radflow/elliptic.hpp"
#include "radflow/parallel.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace radflow {

/// Per-step record; integrals use the hat weights of the grid, for which the
/// scheme satisfies its discrete norm and energy laws exactly.
struct StepDiagnostics {
    int step = 0;
    double time = 0.0;
    double L1 = 0.0;
    double L2 = 0.0;
    double Linf = 0.0;
    double dirichlet_energy_phi_u = 0.0;  // ∫|∇φ(u_i)|²
    double Phi_integral = 0.0;            // ∫Φ(u_i)
    double hminus1_rate = 0.0;            // ‖(u_i − u_{i−1})/h‖_{H⁻¹}; 0 at step 0
    int newton_iterations = 0;
};

struct EvolveOptions {
    /// Regularization index; defaults to 64 when φ is not strictly increasing.
    std::optional<int> k_reg;
    /// Keep every output_stride-th state (the final state is always kept).
    int output_stride = 1;
    /// Relative threshold for a rejected step (growth of an Lᵖ norm).
    double reject_tol = 1e-7;
    bool hminus1 = true;
    /// Called with every iterate, including u_0.
    std::function<void(int step, const RadialFunction& u)> observer;
};

struct Trajectory {
    std::vector<int> steps;               // step index of each kept state
    std::vector<double> times;            // t = step·h
    std::vector<RadialFunction> states;
    Nonlinearity phi = Nonlinearity::linear();  // the nonlinearity actually evolved
    double h = 0.0;
    std::vector<StepDiagnostics> diagnostics;   // one per step, including step 0

    /// Σ h ∫|∇φ(u_i)|² + ∫Φ(u_N) − ∫Φ(u_0); the energy inequality asks for ≤ energy_tol.
    double energy_excess = 0.0;
    double energy_tol = 0.0;  // 1e−7·(1 + ∫Φ(u_0))
    bool energy_inequality_holds = true;
    /// Largest step-to-step increase of ∫|∇φ(u_i)|² (≤ 0 when monotone).
    double energy_gradient_increase = 0.0;
    /// Steps where ‖(u_i − u_{i−1})/h‖_{H⁻¹} exceeds √(∫Φ(u_0)/t_i) + energy_tol; reported only.
    std::vector<int> hminus1_exceedances;

    [[nodiscard]] const RadialFunction& final_state() const { return states.back(); }
};

/// Implicit Euler for u_t = Δφ(u) on B_R with φ(u) = 0 on ∂B_R, T = N·h.
/// Throws StepRejected if an Lᵖ norm grows by more than reject_tol·max(1, norm).
Trajectory evolve(const Nonlinearity& phi, const RadialFunction& u0, double h, double T,
                  const EvolveOptions& opts = {});

/// Discrete flow laws of one trajectory, each relative to its natural scale.
struct FlowLawReport {
    /// max over steps and p ∈ {1, 2, ∞} of (‖u_i‖_p − ‖u_{i−1}‖_p) / max(1, ‖u_{i−1}‖_p).
    double lp_increase = 0.0;
    /// energy_excess / (1 + ∫Φ(u_0)).
    double energy_excess = 0.0;
    /// energy_gradient_increase / max(1, ∫|∇φ(u_1)|²).
    double gradient_increase = 0.0;
    bool holds = true;
};

FlowLawReport flow_laws(const Trajectory& traj, double tol = 1e-7);

/// Exact H⁻¹(B_R) norm of a piecewise-linear g: √(∫ g w) with −Δw = g, w(R) = 0, from
/// the flux identity ∫ g w dV = ∫₀ᴿ F(r)² / (ωψⁿ⁻¹(r)) dr, F(r) = ∫_{B_r} g dV.
class HMinus1Norm {
public:
    explicit HMinus1Norm(GridPtr grid);
    [[nodiscard]] double operator()(const RadialFunction& g) const;

private:
    GridPtr grid_;
    // Per cell and outer Gauss node: ball-integral weights of the two hat halves and the
    // outer weight h·w_q / (ωψⁿ⁻¹(r_q)).
    std::vector<double> inner_left_, inner_right_, outer_;
};

double hminus1_norm(const RadialFunction& g);

struct NestedDomainOptions {
    double spacing = 0.01;  // common node spacing; every radius must be a multiple
    EvolveOptions evolve;
    std::vector<double> report_times;  // empty: the final time only
    double tol = 1e-8;
    Exec exec = Exec::Parallel;
};

struct NestedDomainReport {
    std::vector<double> radii;
    std::vector<Trajectory> trajectories;
    /// max over report times and shared nodes of u_R − u_{R′} for consecutive R < R′.
    double worst_violation = 0.0;
    bool monotone = true;
    /// ‖u_{R′} − u_R‖₁ at the final time for consecutive radii (u_R extended by 0).
    std::vector<double> l1_increments;
};

/// Evolves the datum u0·χ_{B_R} on each radius of a nondecreasing list with shared nodes.
NestedDomainReport nested_domain_limit(const ModelManifold& m, const Nonlinearity& phi,
                                       const std::function<double(double)>& u0, double h, double T,
                                       const std::vector<double>& radii, const NestedDomainOptions& opts = {});

}  // namespace radflow
