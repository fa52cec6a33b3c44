#pragma once

#include "radflow/output.hpp"
#include "radflow/parabolic.hpp"
#include "radflow/polya.hpp"
#include "radflow/scenario.hpp"

#include <optional>
#include <vector>

namespace radflow {

struct ConcentrationFlowOptions {
    EvolveOptions evolve;
    double margin_tol = 1e-7;    // absolute threshold on the margins
    double monotone_tol = 1e-12; // nodewise increase of ū relative to max ū
    double flow_tol = 1e-7;      // discrete flow laws
};

/// u evolved from u0 and ū from a rearrangement of u0 that dominates it, compared at every
/// kept time.
struct ConcentrationSeries {
    std::vector<int> steps;
    std::vector<double> times;
    std::vector<ConcentrationReport> reports;  // u(t) ≺ ū(t)
    std::vector<double> l1_distance;           // ‖u(t) − ū(t)‖₁
    Trajectory u;
    Trajectory u_bar;
    FlowLawReport laws_u;
    FlowLawReport laws_u_bar;
    /// max over every step and node of (ū_{j+1} − ū_j) / max ū.
    double u_bar_max_increase = 0.0;
    double min_margin = 0.0;
    bool holds = true;  // no report fails
};

/// Throws ExperimentInconsistent if ū loses monotonicity beyond monotone_tol at any step.
ConcentrationSeries concentration_flow(const Nonlinearity& phi, const RadialFunction& u0, double h, double T,
                                       const ConcentrationFlowOptions& opts = {});

ConcentrationSeries run_concentration_experiment(const PreparedScenario& s);

struct FalsificationResult {
    NazarovResult nazarov;
    ViolationSearch violation;
    double r_hat = 0.0;
    CurvatureGap gap;
    /// Present when a witness exists: the flow from the witness scaled to unit maximum.
    std::optional<ConcentrationSeries> flow;
    bool holds = true;  // Nazarov passes, no witness, gap within tolerance
};

FalsificationResult run_falsification_experiment(const PreparedScenario& s);

/// Runs the scenario's experiment, converts the results to tables and verdicts and records
/// the wall time. StepRejected surfaces as a failed verdict.
RunOutput run_scenario(const PreparedScenario& s);

}  // namespace radflow
