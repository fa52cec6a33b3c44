#include "radflow/polya.hpp"

#include "radflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radflow {

double dirichlet_energy(const RadialFunction& f) {
    const RadialGrid& g = f.grid();
    const auto& mom = g.moments();
    double e = 0.0;
    for (int c = 0; c < g.cells(); ++c) {
        const double slope = (f[c + 1] - f[c]) / g.spacing(c);
        e += slope * slope * mom[c].m0;
    }
    return e;
}

double rearranged_energy(const Rearrangement& fs) {
    const RadialGrid& G = fs.grid();
    const double vmax = std::min(fs.support_volume(), G.total_volume());
    if (vmax <= 0.0) return 0.0;
    const double rmax = G.radius_of_volume(vmax);

    std::vector<double> radii;
    for (double v : fs.breakpoints()) {
        if (v < vmax) radii.push_back(G.radius_of_volume(v));
    }
    for (double r : G.nodes()) {
        if (r < rmax) radii.push_back(r);
    }
    radii.push_back(rmax);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    const ModelManifold& m = G.manifold();
    double energy = 0.0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
        const double ra = radii[i], rb = radii[i + 1];
        if (!(rb > ra)) continue;
        // Between consecutive breakpoints f⋆ is either constant or strictly decreasing.
        const double q1 = fs.value(G.ball_volume(ra + 0.25 * (rb - ra)));
        const double q3 = fs.value(G.ball_volume(ra + 0.75 * (rb - ra)));
        if (q1 == q3) continue;
        const int c = G.locate(0.5 * (ra + rb));
        const double a = G.nodes()[c], h = G.spacing(c);
        energy += G.integrate(c, (ra - a) / h, (rb - a) / h, [&](double t) {
            const double r = a + h * t;
            const double level = fs.value(G.ball_volume(r));
            const double dmu = fs.mu_derivative(level);
            if (dmu == 0.0) return 0.0;
            const double slope = m.omega() * m.density(r) / dmu;
            return slope * slope;
        });
    }
    return energy;
}

PolyaVerdict radial_polya_ratio(const RadialFunction& f, double tol) {
    PolyaVerdict v;
    v.energy_original = dirichlet_energy(f);
    if (!(v.energy_original > 0.0)) fail(ErrorCode::ZeroEnergy, "function has zero Dirichlet energy");
    const SchwarzResult s = schwarz_rearrangement(f);
    v.energy_rearranged = rearranged_energy(s.f_star_1d);
    v.ratio = v.energy_rearranged / v.energy_original;
    v.holds = v.ratio <= 1.0 + tol;
    if (!v.holds) v.witness = f;
    return v;
}

// ------------------------------------------------------------------ Nazarov

namespace {

double nazarov_weight(const ModelManifold& m, double y) { return m.density(m.radius_of_G(y)); }

NazarovRow nazarov_row(const ModelManifold& m, const std::vector<double>& ys, const std::vector<double>& as,
                       std::size_t i, double limit) {
    NazarovRow row;
    row.mu = ys[i];
    row.slack = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ys.size(); ++j) {
        const double sum = ys[i] + ys[j];
        if (!(sum < limit)) break;
        const double slack = nazarov_weight(m, sum) + as[j] - as[i];
        if (slack < row.slack) {
            row.slack = slack;
            row.worst_nu = ys[j];
        }
    }
    return row;
}

}  // namespace

NazarovResult nazarov_check(const ModelManifold& m, const NazarovOptions& opts) {
    if (opts.grid_size < 32) fail(ErrorCode::InvalidArgument, "nazarov scan needs at least 32 points per axis");
    const double total = m.G_total();
    const bool finite = std::isfinite(total);
    const double r_top = std::min(opts.r_max, m.domain_end());
    const double y_lo = m.G(opts.r_min);
    const double y_hi = finite ? total * (1.0 - 1e-9) : m.G(r_top);
    const double limit = finite ? y_hi : std::numeric_limits<double>::infinity();
    if (!(y_hi > y_lo)) fail(ErrorCode::InvalidArgument, "empty nazarov scan range");

    const int N = opts.grid_size;
    std::vector<double> ys(N), as(N);
    for (int i = 0; i < N; ++i) {
        ys[i] = std::exp(std::log(y_lo) + (std::log(y_hi) - std::log(y_lo)) * i / (N - 1));
    }
    ys.back() = std::min(ys.back(), y_hi);
    for (int i = 0; i < N; ++i) as[i] = nazarov_weight(m, ys[i]);

    NazarovResult res;
    res.rows.resize(N);
    if (opts.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < N; ++i) res.rows[i] = nazarov_row(m, ys, as, i, limit);
    } else {
        for (int i = 0; i < N; ++i) res.rows[i] = nazarov_row(m, ys, as, i, limit);
    }

    res.worst_slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
        const NazarovRow& row = res.rows[i];
        if (!std::isfinite(row.slack)) continue;
        if (row.slack < res.worst_slack) {
            res.worst_slack = row.slack;
            res.worst_relative = row.slack / as[i];
            res.mu = row.mu;
            res.nu = row.worst_nu;
        }
    }
    res.pass = !(res.worst_relative < -opts.tol);
    return res;
}

double annulus_isoperimetric_check(const ModelManifold& m, double a, double b) {
    if (!(a >= 0.0) || !(b > a)) fail(ErrorCode::DomainExceeded, "annulus radii must satisfy 0 ≤ a < b");
    m.check_radius(a);
    m.check_radius(b);
    const double boundary = m.omega() * (m.density(a) + m.density(b));
    if (a == 0.0) return boundary - m.perimeter_ball(b);
    const double radius = m.radius_of_G(m.G_between(a, b));
    return boundary - m.perimeter_ball(radius);
}

// ------------------------------------------------------------- tent search

RadialFunction make_tent(const ModelManifold& m, double a, double b, int cells_per_segment) {
    if (!(a >= 0.0) || !(b > a)) fail(ErrorCode::InvalidArgument, "tent needs 0 ≤ a < b");
    const int k = std::max(cells_per_segment, 1);
    std::vector<double> nodes{0.0};
    if (a > 0.0) {
        for (int i = 1; i <= k; ++i) nodes.push_back(a * i / k);
    }
    const int inner = std::max(2 * k, a > 0.0 ? 16 - k : 16);
    const int even = inner + inner % 2;
    for (int i = 1; i <= even; ++i) nodes.push_back(a + (b - a) * i / even);
    nodes.back() = b;
    auto grid = RadialGrid::from_nodes(m, std::move(nodes));
    auto f = RadialFunction::sample(grid, [a, b](double r) { return std::max(0.0, std::min(r - a, b - r)); });
    std::vector<double> v = f.values();
    v.back() = 0.0;
    return RadialFunction(grid, std::move(v));
}

ViolationSearch find_radial_violation(const ModelManifold& m, const TentFamily& family) {
    const int na = std::max(family.a_count, 1), nw = std::max(family.width_count, 1);
    std::vector<TentSample> candidates;
    for (int i = 0; i < na; ++i) {
        const double a = na == 1 ? family.a_min : family.a_min + (family.a_max - family.a_min) * i / (na - 1);
        for (int j = 0; j < nw; ++j) {
            const double w = nw == 1 ? family.width_min
                                     : family.width_min + (family.width_max - family.width_min) * j / (nw - 1);
            if (a + w >= m.domain_end()) continue;
            candidates.push_back({a, a + w, 0.0});
        }
    }
    const int count = static_cast<int>(candidates.size());
    auto evaluate = [&](int i) {
        TentSample& s = candidates[i];
        s.ratio = radial_polya_ratio(make_tent(m, s.a, s.b, family.cells_per_segment), family.tol).ratio;
    };
    if (family.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) evaluate(i);
    } else {
        for (int i = 0; i < count; ++i) evaluate(i);
    }

    ViolationSearch out;
    out.samples = candidates;
    out.best.ratio = -std::numeric_limits<double>::infinity();
    for (const TentSample& s : candidates) {
        if (s.ratio > out.best.ratio) out.best = s;
    }
    if (count > 0 && out.best.ratio > 1.0 + family.tol) {
        out.witness = make_tent(m, out.best.a, out.best.b, family.cells_per_segment);
    }
    return out;
}

// -------------------------------------------------------- curvature gap

CurvatureGap curvature_gap(const ModelManifold& m, double r_hat) {
    if (!(r_hat > 0.0)) fail(ErrorCode::DomainExceeded, "r_hat must be positive");
    m.check_radius(r_hat);
    const double n = m.dim();
    CurvatureGap out;
    out.S_o = m.curvatures(0.0).S;
    out.S_hat = m.curvatures(r_hat).S;
    const double d = n + 2.0;
    out.coeff_original = -out.S_hat / (6.0 * d);
    out.coeff_bracket = (n - 1.0) * (out.S_hat - out.S_o) / (6.0 * d * d);
    out.coeff_lowerbound = out.coeff_original + (n - 1.0) * (out.S_hat - out.S_o) / (3.0 * d * d);
    out.coeff_lowerbound_reference = out.coeff_original + ((n - 1.0) * out.S_hat - out.S_o) / (3.0 * d * d);
    out.coeff_lowerbound_direct =
        (out.S_hat / 6.0 - out.S_o / 3.0) / d + (n - 1.0) * (out.S_o - out.S_hat) / (3.0 * d * d);
    out.gap = out.coeff_lowerbound - out.coeff_original;
    out.gap_direct = out.coeff_lowerbound_direct - out.coeff_original;
    out.gap_reference = out.coeff_lowerbound_reference - out.coeff_original;
    return out;
}

}  // namespace radflow
