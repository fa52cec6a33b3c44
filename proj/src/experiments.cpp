#include "radflow/experiments.hpp"

#include "radflow/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace radflow {

namespace {

double max_relative_increase(const RadialFunction& u) {
    double top = 0.0, rise = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) top = std::max(top, std::abs(u[j]));
    if (top == 0.0) return 0.0;
    for (std::size_t j = 1; j < u.size(); ++j) rise = std::max(rise, u[j] - u[j - 1]);
    return rise / top;
}

EvolveOptions evolve_options(const PreparedScenario& s) {
    EvolveOptions o;
    o.k_reg = s.spec.nonlinearity.k_reg;
    o.output_stride = s.spec.output_stride;
    return o;
}

ConcentrationFlowOptions flow_options(const PreparedScenario& s) {
    ConcentrationFlowOptions o;
    o.evolve = evolve_options(s);
    o.margin_tol = s.spec.tol.margin * s.tol_scale;
    o.monotone_tol = s.spec.tol.monotone * s.tol_scale;
    o.flow_tol = s.spec.tol.flow * s.tol_scale;
    return o;
}

std::string index_file(std::string_view prefix, std::size_t k) {
    return std::string(prefix) + "_" + std::to_string(k) + ".csv";
}

void add_series(RunOutput& out, std::string_view prefix, const ConcentrationSeries& c, double flow_tol,
                bool verdicts) {
    CsvTable diag{std::string(prefix) + "_diagnostics.csv",
                  {"step", "time", "min_margin", "tol", "l1_distance", "L1_u", "L1_u_bar", "Linf_u", "Linf_u_bar",
                   "dirichlet_energy_phi_u", "dirichlet_energy_phi_u_bar", "Phi_integral_u", "Phi_integral_u_bar"},
                  {}};
    for (std::size_t k = 0; k < c.reports.size(); ++k) {
        const ConcentrationReport& rep = c.reports[k];
        CsvTable t{index_file(prefix, k), {"r", "margin"}, {}};
        for (std::size_t j = 0; j < rep.radii.size(); ++j) t.rows.push_back({rep.radii[j], rep.margins[j]});
        out.tables.push_back(std::move(t));
        const StepDiagnostics& du = c.u.diagnostics[c.steps[k]];
        const StepDiagnostics& db = c.u_bar.diagnostics[c.steps[k]];
        diag.rows.push_back({static_cast<double>(c.steps[k]), c.times[k], rep.min_margin, rep.tol, c.l1_distance[k],
                             du.L1, db.L1, du.Linf, db.Linf, du.dirichlet_energy_phi_u, db.dirichlet_energy_phi_u,
                             du.Phi_integral, db.Phi_integral});
    }
    out.tables.push_back(std::move(diag));

    const std::string p(prefix);
    out.note(p + "_min_margin", c.min_margin);
    out.note(p + "_output_times", static_cast<long long>(c.times.size()));
    out.note(p + "_u_bar_max_increase", c.u_bar_max_increase);
    out.note(p + "_lp_increase", std::max(c.laws_u.lp_increase, c.laws_u_bar.lp_increase));
    out.note(p + "_energy_excess", std::max(c.laws_u.energy_excess, c.laws_u_bar.energy_excess));
    out.note(p + "_gradient_increase", std::max(c.laws_u.gradient_increase, c.laws_u_bar.gradient_increase));
    const double d0 = c.l1_distance.front();
    double contraction = 0.0;
    for (double d : c.l1_distance) contraction = std::max(contraction, (d - d0) / std::max(1.0, d0));
    out.note(p + "_l1_contraction_excess", contraction);
    if (!verdicts) return;
    for (std::size_t k = 0; k < c.reports.size(); ++k) {
        if (c.reports[k].verdict == Verdict::Fails) {
            out.require(false, "concentration fails at t = " + format_number(c.times[k]) +
                                   " (min margin " + format_number(c.reports[k].min_margin) + ")");
        }
    }
    out.require(c.laws_u.holds, "flow laws fail for u");
    out.require(c.laws_u_bar.holds, "flow laws fail for the rearranged flow");
    out.require(contraction <= flow_tol, "L1 distance between the two flows increased");
}

void run_manifold_info(const PreparedScenario& s, RunOutput& out) {
    const ModelManifold& m = s.manifold;
    CsvTable t{"manifold_geometry.csv",
               {"r", "psi", "dpsi", "volume", "perimeter", "K_rad", "K_perp", "Ric_rad", "Ric_perp", "S"},
               {}};
    for (int j = 1; j <= s.spec.M; ++j) {
        const double r = s.spec.R * j / s.spec.M;
        const ProfileJet p = m.profile(r);
        const Curvatures c = m.curvatures(r);
        t.rows.push_back({r, p.psi, p.dpsi, m.volume_ball(r), m.perimeter_ball(r), c.K_rad, c.K_perp, c.Ric_rad,
                          c.Ric_perp, c.S});
    }
    out.tables.push_back(std::move(t));
    out.note("manifold", m.describe());
    out.note("dimension", static_cast<long long>(m.dim()));
    out.note("parabolicity", std::string(to_string(m.is_parabolic())));
    out.note("compact", m.compact());
    out.note("domain_end", m.domain_end());
    out.note("total_volume", m.total_volume());
}

void run_rearrange(const PreparedScenario& s, RunOutput& out) {
    const RadialFunction& f = *s.datum;
    const SchwarzResult sr = schwarz_rearrangement(f);
    out.tables.push_back(radial_function_table("rearrange_datum.csv", f));
    out.tables.push_back(radial_function_table("rearrange_star.csv", sr.f_star));
    out.tables.push_back(radial_function_table("rearrange_dominating.csv", dominating_rearrangement(f)));
    const double tol = s.spec.tol.rearrangement * s.tol_scale;
    for (double p : {1.0, 2.0}) {
        const double original = integral_abs_pow(f, p);
        const double rearranged =
            integrate_rearranged_pair(sr.f_star_1d, sr.f_star_1d, [p](double a, double) { return std::pow(a, p); });
        const double mismatch = std::abs(rearranged - original) / std::max(1.0, original);
        const std::string label = "L" + std::to_string(static_cast<int>(p));
        out.note(label + "_original", original);
        out.note(label + "_rearranged", rearranged);
        out.require(mismatch <= tol, label + " integral changed under rearrangement");
    }
    out.require(sr.f_star.nonincreasing(), "rearranged samples are not nonincreasing");
}

void add_nazarov(RunOutput& out, std::string_view prefix, const NazarovResult& nz) {
    CsvTable t{std::string(prefix) + "_nazarov.csv", {"mu", "worst_nu", "slack"}, {}};
    for (const NazarovRow& row : nz.rows) t.rows.push_back({row.mu, row.worst_nu, row.slack});
    out.tables.push_back(std::move(t));
    const std::string p(prefix);
    out.note(p + "_nazarov_pass", nz.pass);
    out.note(p + "_nazarov_worst_slack", nz.worst_slack);
    out.note(p + "_nazarov_worst_relative", nz.worst_relative);
}

void add_witness(RunOutput& out, std::string file, const ViolationSearch& v) {
    out.tables.push_back(v.witness ? radial_function_table(std::move(file), *v.witness)
                                   : CsvTable{std::move(file), {"r", "value"}, {}});
    out.note("best_tent_a", v.best.a);
    out.note("best_tent_b", v.best.b);
    out.note("best_tent_ratio", v.best.ratio);
    out.note("witness", v.witness.has_value());
}

NazarovOptions nazarov_options(const PreparedScenario& s) {
    NazarovOptions o = s.spec.polya.nazarov;
    o.tol = s.spec.tol.nazarov * s.tol_scale;
    return o;
}

TentFamily tent_options(const PreparedScenario& s) {
    TentFamily f = s.spec.polya.tents;
    f.tol = s.spec.tol.polya * s.tol_scale;
    return f;
}

void run_polya_check(const PreparedScenario& s, RunOutput& out) {
    const NazarovResult nz = nazarov_check(s.manifold, nazarov_options(s));
    add_nazarov(out, "polya", nz);
    const ViolationSearch v = find_radial_violation(s.manifold, tent_options(s));
    CsvTable tents{"polya_tents.csv", {"a", "b", "ratio"}, {}};
    for (const TentSample& t : v.samples) tents.rows.push_back({t.a, t.b, t.ratio});
    out.tables.push_back(std::move(tents));
    add_witness(out, "polya_witness.csv", v);
    out.require(nz.pass, "Nazarov subadditivity fails");
    out.require(!v.witness, "a tent increases its energy under rearrangement");
}

void run_falsify(const PreparedScenario& s, RunOutput& out) {
    const FalsificationResult f = run_falsification_experiment(s);
    add_nazarov(out, "falsify", f.nazarov);
    add_witness(out, "falsify_witness.csv", f.violation);
    const CurvatureGap& g = f.gap;
    out.tables.push_back(CsvTable{"falsify_gap.csv",
                                  {"r_hat", "S_o", "S_hat", "coeff_original", "coeff_lowerbound",
                                   "coeff_lowerbound_reference", "coeff_bracket", "coeff_lowerbound_direct", "gap",
                                   "gap_reference", "gap_direct"},
                                  {{f.r_hat, g.S_o, g.S_hat, g.coeff_original, g.coeff_lowerbound,
                                    g.coeff_lowerbound_reference, g.coeff_bracket, g.coeff_lowerbound_direct, g.gap,
                                    g.gap_reference, g.gap_direct}}});
    out.note("gap", g.gap);
    out.note("gap_direct", g.gap_direct);
    out.require(f.nazarov.pass, "Nazarov subadditivity fails");
    out.require(!f.violation.witness, "a tent increases its energy under rearrangement");
    out.require(g.gap <= s.spec.tol.gap * s.tol_scale, "curvature gap is positive");
    if (f.flow) add_series(out, "falsify", *f.flow, s.spec.tol.flow * s.tol_scale, false);
}

void run_elliptic(const PreparedScenario& s, RunOutput& out) {
    EllipticOptions o;
    o.method = s.spec.elliptic.method;
    const EllipticSolution sol = solve_semilinear(s.beta, *s.datum, o);
    out.tables.push_back(elliptic_solution_table("elliptic_solution.csv", sol));
    out.note("alpha", sol.alpha);
    out.note("residual", sol.residual);
    out.note("boundary_mismatch", sol.boundary_mismatch);
    out.note("iterations", static_cast<long long>(sol.iterations));
    const double scale = 1.0 + integral_abs_pow(*s.datum, 1.0);
    out.require(sol.residual <= s.spec.tol.residual * s.tol_scale * scale, "integral identity residual too large");
}

void run_evolve(const PreparedScenario& s, RunOutput& out) {
    const Trajectory traj = evolve(s.phi, *s.datum, s.spec.h, s.spec.T, evolve_options(s));
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        CsvTable t = radial_function_table(index_file("evolve", k), traj.states[k]);
        t.columns = {"r", "u"};
        out.tables.push_back(std::move(t));
    }
    CsvTable diag{"evolve_diagnostics.csv",
                  {"step", "L1", "L2", "Linf", "dirichlet_energy_phi_u", "Phi_integral", "hminus1_rate"},
                  {}};
    for (const StepDiagnostics& d : traj.diagnostics) {
        diag.rows.push_back({static_cast<double>(d.step), d.L1, d.L2, d.Linf, d.dirichlet_energy_phi_u,
                             d.Phi_integral, d.hminus1_rate});
    }
    out.tables.push_back(std::move(diag));
    const FlowLawReport laws = flow_laws(traj, s.spec.tol.flow * s.tol_scale);
    out.note("nonlinearity", traj.phi.describe());
    out.note("lp_increase", laws.lp_increase);
    out.note("energy_excess", laws.energy_excess);
    out.note("gradient_increase", laws.gradient_increase);
    out.note("hminus1_exceedances", static_cast<long long>(traj.hminus1_exceedances.size()));
    out.require(laws.lp_increase <= s.spec.tol.flow * s.tol_scale, "an Lp norm increased");
    out.require(laws.energy_excess <= s.spec.tol.flow * s.tol_scale, "energy inequality fails");
    out.require(laws.gradient_increase <= s.spec.tol.flow * s.tol_scale, "gradient energy increased");
}

void run_concentration(const PreparedScenario& s, RunOutput& out) {
    const ConcentrationSeries c = run_concentration_experiment(s);
    out.note("nonlinearity", c.u.phi.describe());
    add_series(out, "concentration", c, s.spec.tol.flow * s.tol_scale, true);
}

}  // namespace

ConcentrationSeries concentration_flow(const Nonlinearity& phi, const RadialFunction& u0, double h, double T,
                                       const ConcentrationFlowOptions& opts) {
    ConcentrationSeries c;
    const RadialFunction u_bar0 = dominating_rearrangement(u0);
    c.u = evolve(phi, u0, h, T, opts.evolve);

    EvolveOptions bar_opts = opts.evolve;
    int worst_step = -1;
    bar_opts.observer = [&](int step, const RadialFunction& u) {
        const double rise = max_relative_increase(u);
        if (rise > c.u_bar_max_increase) {
            c.u_bar_max_increase = rise;
            worst_step = step;
        }
    };
    c.u_bar = evolve(phi, u_bar0, h, T, bar_opts);
    if (c.u_bar_max_increase > opts.monotone_tol) {
        fail(ErrorCode::ExperimentInconsistent, "the rearranged flow lost monotonicity at step " +
                                                    std::to_string(worst_step) + " (relative rise " +
                                                    format_number(c.u_bar_max_increase) + ")");
    }

    ConcentrationOptions copts;
    copts.tol_report = opts.margin_tol;
    c.steps = c.u.steps;
    c.times = c.u.times;
    c.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.u.states.size(); ++k) {
        const RadialFunction& a = c.u.states[k];
        const RadialFunction& b = c.u_bar.states[k];
        c.reports.push_back(concentration_compare(a, b, copts));
        c.l1_distance.push_back(l1_distance(a, b));
        c.min_margin = std::min(c.min_margin, c.reports.back().min_margin);
        if (c.reports.back().verdict == Verdict::Fails) c.holds = false;
    }
    c.laws_u = flow_laws(c.u, opts.flow_tol);
    c.laws_u_bar = flow_laws(c.u_bar, opts.flow_tol);
    return c;
}

ConcentrationSeries run_concentration_experiment(const PreparedScenario& s) {
    if (s.spec.experiment != ExperimentKind::Concentration) {
        fail(ErrorCode::InvalidArgument, "scenario is not a concentration experiment");
    }
    return concentration_flow(s.phi, *s.datum, s.spec.h, s.spec.T, flow_options(s));
}

FalsificationResult run_falsification_experiment(const PreparedScenario& s) {
    if (s.spec.experiment != ExperimentKind::Falsify) {
        fail(ErrorCode::InvalidArgument, "scenario is not a falsification experiment");
    }
    FalsificationResult f;
    f.nazarov = nazarov_check(s.manifold, nazarov_options(s));
    f.violation = find_radial_violation(s.manifold, tent_options(s));
    f.r_hat = s.spec.polya.r_hat;
    f.gap = curvature_gap(s.manifold, f.r_hat);
    f.holds = f.nazarov.pass && !f.violation.witness && f.gap.gap <= s.spec.tol.gap * s.tol_scale;

    if (f.violation.witness) {
        const RadialFunction& w = *f.violation.witness;
        const double top = w.max_abs();
        GridPtr grid = s.grid;
        const double b = f.violation.best.b;
        if (b >= s.spec.R) {
            const double end = s.manifold.domain_end();
            const double R = std::isfinite(end) ? std::min(2.0 * b, 0.5 * (b + end)) : 2.0 * b;
            grid = RadialGrid::uniform(s.manifold, R, s.spec.M);
        }
        std::vector<double> vals = RadialFunction::sample(grid, [&](double r) { return w.at(r) / top; }).values();
        vals.back() = 0.0;
        f.flow = concentration_flow(s.phi, RadialFunction(grid, std::move(vals)), s.spec.h, s.spec.T, flow_options(s));
    }
    return f;
}

RunOutput run_scenario(const PreparedScenario& s) {
    RunOutput out;
    out.experiment = std::string(to_string(s.spec.experiment));
    const auto start = std::chrono::steady_clock::now();
    try {
        switch (s.spec.experiment) {
            case ExperimentKind::ManifoldInfo: run_manifold_info(s, out); break;
            case ExperimentKind::Rearrange: run_rearrange(s, out); break;
            case ExperimentKind::PolyaCheck: run_polya_check(s, out); break;
            case ExperimentKind::Falsify: run_falsify(s, out); break;
            case ExperimentKind::Elliptic: run_elliptic(s, out); break;
            case ExperimentKind::Evolve: run_evolve(s, out); break;
            case ExperimentKind::Concentration: run_concentration(s, out); break;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::StepRejected) throw;
        out.tables.clear();
        out.require(false, e.what());
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace radflow
