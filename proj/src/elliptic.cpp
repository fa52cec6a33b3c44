#include "radflow/elliptic.hpp"

#include "radflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace radflow {

namespace {

constexpr double kHuge = 1e300;

/// Lumped system K·a(x) + W·(b(x) − rhs) = 0 at the free nodes 0..M−1, x_M = 0,
/// with K the P1 stiffness matrix and W the hat masses. a and b are nondecreasing.
struct MonotoneSystem {
    std::function<double(double)> a, da, b, db;
};

struct StiffnessData {
    std::vector<double> k;  // per cell: m0 / h²
    std::vector<double> W;  // per node
};

StiffnessData stiffness(const RadialGrid& g) {
    StiffnessData s;
    const auto& mom = g.moments();
    s.k.resize(g.cells());
    for (int c = 0; c < g.cells(); ++c) {
        const double h = g.spacing(c);
        s.k[c] = mom[c].m0 / (h * h);
    }
    s.W = g.weights();
    return s;
}

// Partial sums of the nodal residual: the discrete integral identity at each node.
std::vector<double> identity_residuals(const StiffnessData& s, const std::vector<double>& av,
                                       const std::vector<double>& bv, const std::vector<double>& rhs) {
    const std::size_t M = s.k.size();
    std::vector<double> out(M);
    double sum = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
        sum += s.W[j] * (bv[j] - rhs[j]);
        out[j] = s.k[j] * (av[j] - av[j + 1]) + sum;
    }
    return out;
}

void nodal_residual(const StiffnessData& s, const std::vector<double>& av, const std::vector<double>& bv,
                    const std::vector<double>& rhs, std::vector<double>& F) {
    const std::size_t M = s.k.size();
    F.assign(M, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
        double kterm = s.k[j] * (av[j] - av[j + 1]);
        if (j > 0) kterm += s.k[j - 1] * (av[j] - av[j - 1]);
        F[j] = kterm + s.W[j] * (bv[j] - rhs[j]);
    }
}

double finite_or_huge(double d) { return std::isfinite(d) ? d : kHuge; }

struct NewtonOutcome {
    std::vector<double> x;
    int iterations = 0;
};

NewtonOutcome solve_monotone(const RadialGrid& g, const MonotoneSystem& sys, const std::vector<double>& rhs,
                             std::vector<double> x, int max_iterations) {
    const StiffnessData s = stiffness(g);
    const std::size_t M = s.k.size();
    const std::size_t N = M + 1;
    x.resize(N);
    x[M] = 0.0;

    std::vector<double> av(N), bv(N), F, trial(N), tav(N), tbv(N), Ft;
    auto evaluate = [&](const std::vector<double>& xs, std::vector<double>& as, std::vector<double>& bs,
                        std::vector<double>& Fs) {
        for (std::size_t j = 0; j < N; ++j) {
            as[j] = sys.a(xs[j]);
            bs[j] = sys.b(xs[j]);
        }
        nodal_residual(s, as, bs, rhs, Fs);
        double merit = 0.0;
        for (double f : Fs) merit += f * f;
        return merit;
    };

    double scale = 0.0;
    for (std::size_t j = 0; j < M; ++j) scale = std::max(scale, s.W[j] * std::abs(rhs[j]));
    scale = std::max(scale, std::numeric_limits<double>::min());

    double merit = evaluate(x, av, bv, F);
    std::vector<double> lower(M), diag(M), upper(M), delta(M), cp(M);
    NewtonOutcome out;
    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        double fmax = 0.0;
        for (double f : F) fmax = std::max(fmax, std::abs(f));
        if (fmax == 0.0) break;

        for (std::size_t j = 0; j < M; ++j) {
            const double daj = finite_or_huge(sys.da(x[j]));
            diag[j] = s.k[j] * daj + s.W[j] * finite_or_huge(sys.db(x[j]));
            if (j > 0) {
                diag[j] += s.k[j - 1] * daj;
                lower[j] = -s.k[j - 1] * finite_or_huge(sys.da(x[j - 1]));
            }
            upper[j] = j + 1 < M ? -s.k[j] * finite_or_huge(sys.da(x[j + 1])) : 0.0;
        }
        // Thomas algorithm; the Jacobian is a column diagonally dominant M-matrix.
        double denom = diag[0];
        if (!(denom > 0.0)) fail(ErrorCode::NonConvergence, "singular Newton system");
        cp[0] = upper[0] / denom;
        delta[0] = -F[0] / denom;
        for (std::size_t j = 1; j < M; ++j) {
            denom = diag[j] - lower[j] * cp[j - 1];
            if (!(denom > 0.0)) fail(ErrorCode::NonConvergence, "singular Newton system");
            cp[j] = upper[j] / denom;
            delta[j] = (-F[j] - lower[j] * delta[j - 1]) / denom;
        }
        for (std::size_t j = M - 1; j-- > 0;) delta[j] -= cp[j] * delta[j + 1];

        double step_max = 0.0, xmax = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            step_max = std::max(step_max, std::abs(delta[j]));
            xmax = std::max(xmax, std::abs(x[j]));
        }

        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
            for (std::size_t j = 0; j < M; ++j) trial[j] = x[j] + lambda * delta[j];
            trial[M] = 0.0;
            const double tm = evaluate(trial, tav, tbv, Ft);
            if (std::isfinite(tm) && tm < merit) {
                accepted = true;
                x.swap(trial);
                av.swap(tav);
                bv.swap(tbv);
                F.swap(Ft);
                merit = tm;
                break;
            }
        }
        if (!accepted) {
            // Rounding floor: no representable improvement along the Newton direction.
            if (fmax <= 1e-9 * scale) break;
            fail(ErrorCode::NonConvergence, "Newton line search stalled");
        }
        if (lambda == 1.0 && step_max <= 4.0 * std::numeric_limits<double>::epsilon() * xmax) break;
        if (it + 1 == max_iterations) fail(ErrorCode::NonConvergence, "Newton iteration limit reached");
    }
    out.x = std::move(x);
    return out;
}

// ----------------------------------------------------------------- shooting

struct ShotResult {
    double end = 0.0;              // v(R)
    std::vector<double> nodal;     // v at the grid nodes
    std::vector<double> identity;  // ω|ψⁿ⁻¹v′ − ∫₀ʳ ψⁿ⁻¹(β(v) − f)| at the nodes
};

ShotResult shoot(const Beta& beta, const RadialFunction& f, double alpha, int substeps, bool keep) {
    const RadialGrid& g = f.grid();
    const ModelManifold& m = g.manifold();
    const int n = m.dim();
    const auto& nodes = g.nodes();
    auto source = [&](double r, double v) { return m.density(r) * (beta.beta(v) - f.at(r)); };
    auto rhs = [&](double r, double v, double w, double& dv, double& dw) {
        const double d = m.density(r);
        dv = w / d;
        dw = d * (beta.beta(v) - f.at(r));
    };

    ShotResult res;
    if (keep) {
        res.nodal.assign(nodes.size(), 0.0);
        res.identity.assign(nodes.size(), 0.0);
        res.nodal[0] = alpha;
    }
    // Series start over the first substep: v ≈ α + c r²/(2n), w ≈ c rⁿ/n with c = β(α) − f(0).
    const double c = beta.beta(alpha) - f[0];
    double r = g.spacing(0) / substeps;
    double v = alpha + c * r * r / (2.0 * n);
    double w = c * std::pow(r, n) / n;
    double integral = w;
    for (int cell = 0; cell < g.cells(); ++cell) {
        const double h = g.spacing(cell) / substeps;
        for (int s = (cell == 0 ? 1 : 0); s < substeps; ++s) {
            double k1v, k1w, k2v, k2w, k3v, k3w, k4v, k4w;
            rhs(r, v, w, k1v, k1w);
            rhs(r + 0.5 * h, v + 0.5 * h * k1v, w + 0.5 * h * k1w, k2v, k2w);
            rhs(r + 0.5 * h, v + 0.5 * h * k2v, w + 0.5 * h * k2w, k3v, k3w);
            rhs(r + h, v + h * k3v, w + h * k3w, k4v, k4w);
            const double v_next = v + h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
            const double w_next = w + h * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0;
            const double r_next = nodes[cell] + (s + 1) * h;
            if (!std::isfinite(v_next)) {
                res.end = std::copysign(std::numeric_limits<double>::infinity(), std::isnan(v_next) ? alpha : v_next);
                return res;
            }
            if (keep) {
                // Simpson on the substep with a cubic Hermite midpoint value.
                const double dv1 = w_next / m.density(r_next);
                const double v_mid = 0.5 * (v + v_next) + h * (k1v - dv1) / 8.0;
                integral += h / 6.0 *
                            (source(r, v) + 4.0 * source(r + 0.5 * h, v_mid) + source(r_next, v_next));
            }
            v = v_next;
            w = w_next;
            r = r_next;
        }
        r = nodes[cell + 1];
        if (keep) {
            res.nodal[cell + 1] = v;
            res.identity[cell + 1] = m.omega() * std::abs(w - integral);
        }
    }
    res.end = v;
    return res;
}

EllipticSolution solve_by_shooting(const Beta& beta, const RadialFunction& f, const EllipticOptions& opts) {
    const int substeps = std::max(opts.shooting_substeps, 1);
    auto end_value = [&](double alpha) { return shoot(beta, f, alpha, substeps, false).end; };

    double lo = 0.0, hi = 0.0;
    const double at_zero = end_value(0.0);
    if (at_zero == 0.0) {
        lo = hi = 0.0;
    } else {
        const double sign = at_zero < 0.0 ? 1.0 : -1.0;
        double probe = sign;
        int doublings = 0;
        while (true) {
            const double e = end_value(probe);
            if (sign * e >= 0.0) break;
            probe *= 2.0;
            if (++doublings > opts.bracket_doublings) {
                fail(ErrorCode::ShootingBracketFailed, "pole value bracket not found");
            }
        }
        lo = std::min(0.0, probe);
        hi = std::max(0.0, probe);
    }

    EllipticSolution out;
    int it = 0;
    while (hi > lo && it < opts.max_iterations) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double e = end_value(mid);
        out.bisection.push_back(std::abs(e));
        (e < 0.0 ? lo : hi) = mid;
        ++it;
    }
    const double alpha = 0.5 * (lo + hi);
    ShotResult shot = shoot(beta, f, alpha, substeps, true);
    if (!std::isfinite(shot.end)) fail(ErrorCode::NonConvergence, "shooting produced non-finite values");
    out.residual = 0.0;
    for (double e : shot.identity) out.residual = std::max(out.residual, e);
    out.residuals = std::move(shot.identity);
    out.boundary_mismatch = std::abs(shot.end);
    shot.nodal.back() = 0.0;
    out.v = RadialFunction(f.grid_ptr(), std::move(shot.nodal));
    out.alpha = alpha;
    out.iterations = it;
    return out;
}

}  // namespace

EllipticSolution solve_semilinear(const Beta& beta, const RadialFunction& f, const EllipticOptions& opts) {
    if (opts.method == EllipticMethod::Shooting) return solve_by_shooting(beta, f, opts);

    MonotoneSystem sys;
    sys.a = [](double x) { return x; };
    sys.da = [](double) { return 1.0; };
    sys.b = beta.beta;
    sys.db = beta.dbeta;
    const std::vector<double>& rhs = f.values();
    NewtonOutcome sol = solve_monotone(f.grid(), sys, rhs, std::vector<double>(rhs.size(), 0.0), opts.max_iterations);

    EllipticSolution out;
    const StiffnessData s = stiffness(f.grid());
    std::vector<double> bv(sol.x.size());
    for (std::size_t j = 0; j < bv.size(); ++j) bv[j] = beta.beta(sol.x[j]);
    out.residuals = identity_residuals(s, sol.x, bv, rhs);
    for (double r : out.residuals) out.residual = std::max(out.residual, std::abs(r));
    out.alpha = sol.x[0];
    out.iterations = sol.iterations;
    out.v = RadialFunction(f.grid_ptr(), std::move(sol.x));
    return out;
}

StepResult discrete_step(const Nonlinearity& phi, double h, const RadialFunction& w_prev, int max_iterations) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "time step must be positive");
    if (!phi.strictly_increasing()) {
        fail(ErrorCode::InvalidArgument, "discrete step needs a strictly increasing nonlinearity; regularize first");
    }
    MonotoneSystem sys;
    sys.a = [&phi](double u) { return phi.phi(u); };
    sys.da = [&phi](double u) { return phi.dphi(u); };
    sys.b = [h](double u) { return u / h; };
    sys.db = [h](double) { return 1.0 / h; };
    std::vector<double> rhs = w_prev.values();
    for (double& r : rhs) r /= h;
    std::vector<double> start = w_prev.values();
    start.back() = 0.0;
    NewtonOutcome sol = solve_monotone(w_prev.grid(), sys, rhs, std::move(start), max_iterations);

    const StiffnessData s = stiffness(w_prev.grid());
    std::vector<double> av(sol.x.size()), bv(sol.x.size());
    for (std::size_t j = 0; j < av.size(); ++j) {
        av[j] = phi.phi(sol.x[j]);
        bv[j] = sol.x[j] / h;
    }
    StepResult out;
    for (double r : identity_residuals(s, av, bv, rhs)) out.residual = std::max(out.residual, std::abs(r));
    out.iterations = sol.iterations;
    out.v = RadialFunction(w_prev.grid_ptr(), std::move(av));
    out.w = RadialFunction(w_prev.grid_ptr(), std::move(sol.x));
    return out;
}

EllipticConcentration elliptic_concentration_check(const Nonlinearity& phi, double h, const RadialFunction& f,
                                                   const RadialFunction& f_bar, const ConcentrationOptions& opts) {
    const ConcentrationReport pre = concentration_compare(f, f_bar, opts);
    if (pre.verdict == Verdict::Fails) {
        fail(ErrorCode::PreconditionOrderFails, "datum is not concentrated below the comparison datum");
    }
    EllipticConcentration out{ConcentrationReport{}, 0.0, f, f_bar};
    out.w = discrete_step(phi, h, f).w;
    out.w_bar = discrete_step(phi, h, f_bar).w;
    out.report = concentration_compare(out.w, out.w_bar, opts);
    out.A_max = -std::numeric_limits<double>::infinity();
    for (double margin : out.report.margins) out.A_max = std::max(out.A_max, -margin);
    return out;
}

double hopf_strict_decrease_check(const RadialFunction& v, const RadialFunction& f) {
    if (!v.grid().same_as(f.grid())) fail(ErrorCode::GridMismatch, "solution and datum live on different grids");
    if (!f.nonincreasing()) fail(ErrorCode::NotApplicable, "datum is not radially nonincreasing");
    if (f.max_abs() == 0.0) fail(ErrorCode::NotApplicable, "datum vanishes identically");
    const RadialGrid& g = v.grid();
    const double start = 2.0 * g.max_spacing();
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < g.cells(); ++c) {
        if (g.nodes()[c] < start) continue;
        best = std::min(best, -(v[c + 1] - v[c]) / g.spacing(c));
    }
    if (!std::isfinite(best)) fail(ErrorCode::NotApplicable, "grid too coarse for the interior window");
    return best;
}

double monotonicity_threshold(const ModelManifold& m, double R) {
    m.check_radius(R);
    constexpr int kSamples = 1024;
    double worst = 0.0;
    for (int i = 1; i <= kSamples; ++i) {
        const double r = R * i / kSamples;
        const ProfileJet p = m.profile(r);
        const double q = (p.ddpsi * p.psi - p.dpsi * p.dpsi) / (p.psi * p.psi);
        if (std::isfinite(q)) worst = std::max(worst, q);
    }
    return (m.dim() - 1) * worst + 1.0;
}

}  // namespace radflow
