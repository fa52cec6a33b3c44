#include "radflow/parabolic.hpp"

#include "radflow/error.hpp"
#include "radflow/polya.hpp"
#include "radflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radflow {

namespace {

double lumped_Phi_integral(const Nonlinearity& phi, const RadialFunction& u) {
    const auto& W = u.grid().weights();
    double s = 0.0;
    for (std::size_t j = 0; j < W.size(); ++j) s += W[j] * phi.Phi(u[j]);
    return s;
}

StepDiagnostics measure(const Nonlinearity& phi, const RadialFunction& u, const RadialFunction& v, int step,
                        double time) {
    StepDiagnostics d;
    d.step = step;
    d.time = time;
    d.L1 = lp_norm(u, 1.0);
    d.L2 = lp_norm(u, 2.0);
    d.Linf = u.max_abs();
    d.dirichlet_energy_phi_u = dirichlet_energy(v);
    d.Phi_integral = lumped_Phi_integral(phi, u);
    return d;
}

void check_growth(const char* name, double before, double after, double tol, int step) {
    if (after > before + tol * std::max(1.0, before)) {
        fail(ErrorCode::StepRejected, std::string(name) + " norm increased at step " + std::to_string(step));
    }
}

}  // namespace

Trajectory evolve(const Nonlinearity& phi_in, const RadialFunction& u0, double h, double T, const EvolveOptions& opts) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "time step must be positive");
    if (!(T >= 0.0)) fail(ErrorCode::InvalidArgument, "final time must be nonnegative");
    const double steps_real = T / h;
    const int N = static_cast<int>(std::llround(steps_real));
    if (std::abs(N - steps_real) > 1e-9 * std::max(1.0, steps_real)) {
        fail(ErrorCode::InvalidArgument, "final time must be a whole number of time steps");
    }
    for (double x : u0.values()) {
        if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorCode::InvalidArgument, "datum must be finite and nonnegative");
    }
    if (opts.output_stride < 1) fail(ErrorCode::InvalidArgument, "output stride must be positive");

    Trajectory traj;
    traj.h = h;
    if (opts.k_reg) {
        traj.phi = phi_in.regularization() > 0 ? phi_in : phi_in.regularize(*opts.k_reg);
    } else if (!phi_in.strictly_increasing()) {
        traj.phi = phi_in.regularize(64);
    } else {
        traj.phi = phi_in;
    }
    const Nonlinearity& phi = traj.phi;
    const HMinus1Norm hnorm(u0.grid_ptr());

    RadialFunction u = u0;
    traj.diagnostics.reserve(N + 1);
    traj.diagnostics.push_back(measure(phi, u, u.map([&](double x) { return phi.phi(x); }), 0, 0.0));
    traj.steps.push_back(0);
    traj.times.push_back(0.0);
    traj.states.push_back(u);
    if (opts.observer) opts.observer(0, u);

    const double Phi0 = traj.diagnostics[0].Phi_integral;
    traj.energy_tol = 1e-7 * (1.0 + Phi0);
    double dissipation = 0.0;
    traj.energy_gradient_increase = -std::numeric_limits<double>::infinity();

    for (int i = 1; i <= N; ++i) {
        StepResult step = discrete_step(phi, h, u);
        const double t = i * h;
        StepDiagnostics d = measure(phi, step.w, step.v, i, t);
        d.newton_iterations = step.iterations;
        if (opts.hminus1) {
            std::vector<double> rate(u.size());
            for (std::size_t j = 0; j < rate.size(); ++j) rate[j] = (step.w[j] - u[j]) / h;
            d.hminus1_rate = hnorm(RadialFunction(u.grid_ptr(), std::move(rate)));
            if (d.hminus1_rate > std::sqrt(Phi0 / t) + traj.energy_tol) traj.hminus1_exceedances.push_back(i);
        }
        const StepDiagnostics& prev = traj.diagnostics.back();
        check_growth("L1", prev.L1, d.L1, opts.reject_tol, i);
        check_growth("L2", prev.L2, d.L2, opts.reject_tol, i);
        check_growth("Linf", prev.Linf, d.Linf, opts.reject_tol, i);
        if (i > 1) {
            traj.energy_gradient_increase =
                std::max(traj.energy_gradient_increase, d.dirichlet_energy_phi_u - prev.dirichlet_energy_phi_u);
        }
        dissipation += h * d.dirichlet_energy_phi_u;
        traj.diagnostics.push_back(d);
        u = std::move(step.w);
        if (opts.observer) opts.observer(i, u);
        if (i % opts.output_stride == 0 || i == N) {
            traj.steps.push_back(i);
            traj.times.push_back(t);
            traj.states.push_back(u);
        }
    }
    if (N < 2) traj.energy_gradient_increase = 0.0;
    traj.energy_excess = dissipation + traj.diagnostics.back().Phi_integral - Phi0;
    traj.energy_inequality_holds = traj.energy_excess <= traj.energy_tol;
    return traj;
}

FlowLawReport flow_laws(const Trajectory& traj, double tol) {
    FlowLawReport rep;
    const auto& d = traj.diagnostics;
    for (std::size_t i = 1; i < d.size(); ++i) {
        const auto rise = [](double before, double after) { return (after - before) / std::max(1.0, before); };
        rep.lp_increase = std::max({rep.lp_increase, rise(d[i - 1].L1, d[i].L1), rise(d[i - 1].L2, d[i].L2),
                                    rise(d[i - 1].Linf, d[i].Linf)});
    }
    if (!d.empty()) {
        rep.energy_excess = traj.energy_excess / (1.0 + d.front().Phi_integral);
        const double e1 = d.size() > 1 ? d[1].dirichlet_energy_phi_u : 0.0;
        rep.gradient_increase = std::max(0.0, traj.energy_gradient_increase) / std::max(1.0, e1);
    }
    rep.holds = rep.lp_increase <= tol && rep.energy_excess <= tol && rep.gradient_increase <= tol;
    return rep;
}

// ------------------------------------------------------------------ H⁻¹

HMinus1Norm::HMinus1Norm(GridPtr grid) : grid_(std::move(grid)) {
    const RadialGrid& g = *grid_;
    const ModelManifold& m = g.manifold();
    const quad::GaussRule& rule = quad::gauss_rule();
    constexpr int Q = quad::GaussRule::kPoints;
    inner_left_.resize(static_cast<std::size_t>(g.cells()) * Q);
    inner_right_.resize(inner_left_.size());
    outer_.resize(inner_left_.size());
    for (int c = 0; c < g.cells(); ++c) {
        const double a = g.nodes()[c], h = g.spacing(c);
        auto dens = [&](double s) { return m.omega() * m.density(a + h * s) * h; };
        for (int q = 0; q < Q; ++q) {
            const double tq = 0.5 * (1.0 + rule.x[q]);
            const std::size_t k = static_cast<std::size_t>(c) * Q + q;
            inner_left_[k] = quad::gauss([&](double s) { return (1.0 - s) * dens(s); }, 0.0, tq);
            inner_right_[k] = quad::gauss([&](double s) { return s * dens(s); }, 0.0, tq);
            outer_[k] = 0.5 * rule.w[q] * h / (m.omega() * m.density(a + h * tq));
        }
    }
}

double HMinus1Norm::operator()(const RadialFunction& g) const {
    if (!g.grid().same_as(*grid_)) fail(ErrorCode::GridMismatch, "datum lives on a different grid");
    const auto& mom = grid_->moments();
    constexpr int Q = quad::GaussRule::kPoints;
    double flux = 0.0, total = 0.0;
    for (int c = 0; c < grid_->cells(); ++c) {
        for (int q = 0; q < Q; ++q) {
            const std::size_t k = static_cast<std::size_t>(c) * Q + q;
            const double F = flux + g[c] * inner_left_[k] + g[c + 1] * inner_right_[k];
            total += F * F * outer_[k];
        }
        flux += g[c] * (mom[c].m0 - mom[c].m1) + g[c + 1] * mom[c].m1;
    }
    return std::sqrt(total);
}

double hminus1_norm(const RadialFunction& g) { return HMinus1Norm(g.grid_ptr())(g); }

// ------------------------------------------------------------ nested domains

NestedDomainReport nested_domain_limit(const ModelManifold& m, const Nonlinearity& phi,
                                       const std::function<double(double)>& u0, double h, double T,
                                       const std::vector<double>& radii, const NestedDomainOptions& opts) {
    if (radii.empty()) fail(ErrorCode::InvalidArgument, "no radii given");
    if (!(opts.spacing > 0.0)) fail(ErrorCode::InvalidArgument, "spacing must be positive");
    std::vector<int> cells;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i > 0 && radii[i] < radii[i - 1]) fail(ErrorCode::InvalidArgument, "radii must be nondecreasing");
        const double ratio = radii[i] / opts.spacing;
        const long count = std::lround(ratio);
        if (std::abs(ratio - count) > 1e-9 * ratio) {
            fail(ErrorCode::InvalidArgument, "every radius must be a multiple of the spacing");
        }
        cells.push_back(static_cast<int>(count));
    }

    NestedDomainReport rep;
    rep.radii = radii;
    rep.trajectories.resize(radii.size());
    const int count = static_cast<int>(radii.size());
    auto run = [&](int i) {
        // Nodes are i·spacing on every grid so that shared nodes agree bitwise.
        std::vector<double> nodes(cells[i] + 1);
        for (int j = 0; j <= cells[i]; ++j) nodes[j] = j * opts.spacing;
        nodes.back() = radii[i];
        auto grid = RadialGrid::from_nodes(m, std::move(nodes));
        auto datum = RadialFunction::sample(grid, u0);
        std::vector<double> vals = datum.values();
        vals.back() = 0.0;
        rep.trajectories[i] = evolve(phi, RadialFunction(grid, std::move(vals)), h, T, opts.evolve);
    };
    if (opts.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) run(i);
    } else {
        for (int i = 0; i < count; ++i) run(i);
    }

    for (int i = 0; i + 1 < count; ++i) {
        const Trajectory& a = rep.trajectories[i];
        const Trajectory& b = rep.trajectories[i + 1];
        for (std::size_t s = 0; s < a.states.size(); ++s) {
            const bool wanted =
                opts.report_times.empty()
                    ? s + 1 == a.states.size()
                    : std::any_of(opts.report_times.begin(), opts.report_times.end(),
                                  [&](double t) { return std::abs(t - a.times[s]) <= 0.5 * h; });
            if (!wanted) continue;
            const RadialFunction& ua = a.states[s];
            const RadialFunction& ub = b.states[s];
            for (std::size_t j = 0; j < ua.size(); ++j) {
                rep.worst_violation = std::max(rep.worst_violation, ua[j] - ub[j]);
            }
        }
        // L¹ increment at the final time: extend u_R by zero onto the larger grid.
        const RadialFunction& ua = a.final_state();
        const RadialFunction& ub = b.final_state();
        std::vector<double> ext(ub.size(), 0.0);
        for (std::size_t j = 0; j < ua.size(); ++j) ext[j] = ua[j];
        rep.l1_increments.push_back(l1_distance(RadialFunction(ub.grid_ptr(), std::move(ext)), ub));
    }
    rep.monotone = rep.worst_violation <= opts.tol;
    return rep;
}

}  // namespace radflow
