#include "radflow/radial.hpp"

#include "radflow/error.hpp"
#include "radflow/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace radflow {

// ================================================================ RadialGrid

RadialGrid::RadialGrid(const ModelManifold& m, std::vector<double> nodes) : manifold_(m), nodes_(std::move(nodes)) {
    if (nodes_.size() < 17) fail(ErrorCode::InvalidArgument, "a radial grid needs at least 16 cells");
    if (nodes_.front() != 0.0) fail(ErrorCode::InvalidArgument, "grid nodes must start at the pole");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1])) fail(ErrorCode::InvalidArgument, "grid nodes must be strictly increasing");
        max_spacing_ = std::max(max_spacing_, nodes_[i] - nodes_[i - 1]);
    }
    m.check_radius(nodes_.back());

    const int M = cells();
    const double w = m.omega();
    moments_.resize(M);
    ball_volumes_.assign(M + 1, 0.0);
    weights_.assign(M + 1, 0.0);
    const auto& rule = quad::gauss_rule();
    for (int c = 0; c < M; ++c) {
        const double a = nodes_[c], h = spacing(c);
        CellMoments cm;
        for (int i = 0; i < quad::GaussRule::kPoints; ++i) {
            const double t = 0.5 * (1.0 + rule.x[i]);
            const double d = 0.5 * rule.w[i] * m.density(a + h * t);
            cm.m0 += d;
            cm.m1 += d * t;
            cm.m2 += d * t * t;
        }
        cm.m0 *= w * h;
        cm.m1 *= w * h;
        cm.m2 *= w * h;
        moments_[c] = cm;
        ball_volumes_[c + 1] = ball_volumes_[c] + cm.m0;
        weights_[c] += cm.m0 - cm.m1;
        weights_[c + 1] += cm.m1;
    }
    expand_density();
}

void RadialGrid::expand_density() {
    constexpr int K = kDensityDegree;
    using Rule = boost::math::quadrature::gauss<double, K + 1>;
    const auto& abscissa = Rule::abscissa();
    const auto& weight = Rule::weights();
    std::vector<double> x, wq;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        x.push_back(abscissa[i]);
        wq.push_back(weight[i]);
        if (abscissa[i] != 0.0) {
            x.push_back(-abscissa[i]);
            wq.push_back(weight[i]);
        }
    }
    const int M = cells();
    density_legendre_.assign(M, {});
    expanded_.assign(M, false);
    density_degree_.assign(M, K);
    std::array<double, K + 1> P{};
    for (int c = 0; c < M; ++c) {
        const double a = nodes_[c], h = spacing(c);
        auto& coeff = density_legendre_[c];
        double largest = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = manifold_.density(a + 0.5 * h * (1.0 + x[i]));
            largest = std::max(largest, std::abs(d));
            P[0] = 1.0;
            P[1] = x[i];
            for (int k = 1; k < K; ++k) P[k + 1] = ((2 * k + 1) * x[i] * P[k] - k * P[k - 1]) / (k + 1);
            for (int k = 0; k <= K; ++k) coeff[k] += wq[i] * d * P[k];
        }
        for (int k = 0; k <= K; ++k) coeff[k] *= 0.5 * (2 * k + 1);
        const double tail = std::max(std::abs(coeff[K - 1]), std::abs(coeff[K]));
        expanded_[c] = std::isfinite(tail) && tail <= 1e-14 * largest;
        // Store cₖ/(2k + 1) for the antiderivative and drop negligible trailing terms.
        for (int k = 1; k <= K; ++k) coeff[k] /= 2 * k + 1;
        int degree = K;
        while (degree > 1 && std::abs(coeff[degree]) <= 1e-18 * largest) --degree;
        density_degree_[c] = degree;
    }
}

namespace {

// Three-term Legendre recurrence Pₖ₊₁ = αₖ x Pₖ − βₖ Pₖ₋₁.
struct LegendreRecurrence {
    std::array<double, RadialGrid::kDensityDegree + 1> alpha{}, beta{};
    constexpr LegendreRecurrence() {
        for (int k = 1; k <= RadialGrid::kDensityDegree; ++k) {
            alpha[k] = (2.0 * k + 1.0) / (k + 1.0);
            beta[k] = k / (k + 1.0);
        }
    }
};
constexpr LegendreRecurrence kLegendre;

}  // namespace

double RadialGrid::expanded_antiderivative(int cell, double t) const {
    const auto& coeff = density_legendre_[cell];
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 2.0 * coeff[0];
    const int degree = density_degree_[cell];
    const double x = 2.0 * t - 1.0;
    // ∫₋₁ˣ P₀ = x + 1 and ∫₋₁ˣ Pₖ = (Pₖ₊₁ − Pₖ₋₁)/(2k + 1) for k ≥ 1.
    double p_prev = 1.0, p = x;
    double s = coeff[0] * (x + 1.0);
    for (int k = 1; k <= degree; ++k) {
        const double p_next = kLegendre.alpha[k] * x * p - kLegendre.beta[k] * p_prev;
        s += coeff[k] * (p_next - p_prev);
        p_prev = p;
        p = p_next;
    }
    return s;
}

double RadialGrid::local_density(int cell, double t) const {
    if (!expanded_[cell]) return manifold_.density(nodes_[cell] + spacing(cell) * t);
    const auto& coeff = density_legendre_[cell];
    const int degree = density_degree_[cell];
    const double x = 2.0 * t - 1.0;
    // Stored coefficients are cₖ/(2k + 1).
    double p_prev = 1.0, p = x;
    double s = coeff[0] + (degree >= 1 ? 3.0 * coeff[1] * x : 0.0);
    for (int k = 1; k < degree; ++k) {
        const double p_next = kLegendre.alpha[k] * x * p - kLegendre.beta[k] * p_prev;
        s += (2 * k + 3) * coeff[k + 1] * p_next;
        p_prev = p;
        p = p_next;
    }
    return s;
}

GridPtr RadialGrid::uniform(const ModelManifold& m, double R, int cells) {
    if (!(R > 0.0)) fail(ErrorCode::InvalidArgument, "grid radius must be positive");
    if (cells < 16) fail(ErrorCode::InvalidArgument, "a radial grid needs at least 16 cells");
    std::vector<double> nodes(cells + 1);
    for (int j = 0; j <= cells; ++j) nodes[j] = R * j / cells;
    nodes.back() = R;
    return GridPtr(new RadialGrid(m, std::move(nodes)));
}

GridPtr RadialGrid::from_nodes(const ModelManifold& m, std::vector<double> nodes) {
    return GridPtr(new RadialGrid(m, std::move(nodes)));
}

int RadialGrid::locate(double r) const {
    if (r <= 0.0) return 0;
    if (r >= R()) return cells() - 1;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    return std::clamp(static_cast<int>(it - nodes_.begin()) - 1, 0, cells() - 1);
}

double RadialGrid::measure(int cell, double t0, double t1) const {
    if (t1 <= t0) return 0.0;
    if (t0 == 0.0 && t1 == 1.0) return moments_[cell].m0;
    if (expanded_[cell]) {
        return manifold_.omega() * 0.5 * spacing(cell) *
               (expanded_antiderivative(cell, t1) - expanded_antiderivative(cell, t0));
    }
    const double a = nodes_[cell], h = spacing(cell);
    const double s = quad::gauss([&](double t) { return manifold_.density(a + h * t); }, t0, t1);
    return manifold_.omega() * h * s;
}

double RadialGrid::integrate(int cell, double t0, double t1, const std::function<double(double)>& F) const {
    if (t1 <= t0) return 0.0;
    const double a = nodes_[cell], h = spacing(cell);
    const double s = quad::gauss([&](double t) { return F(t) * manifold_.density(a + h * t); }, t0, t1);
    return manifold_.omega() * h * s;
}

double RadialGrid::ball_volume(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= R()) return total_volume();
    const int c = locate(r);
    return ball_volumes_[c] + measure(c, 0.0, (r - nodes_[c]) / spacing(c));
}

double RadialGrid::radius_of_volume(double V) const {
    if (V <= 0.0) return 0.0;
    if (V >= total_volume()) return R();
    const auto it = std::upper_bound(ball_volumes_.begin(), ball_volumes_.end(), V);
    const int c = std::clamp(static_cast<int>(it - ball_volumes_.begin()) - 1, 0, cells() - 1);
    const double target = V - ball_volumes_[c];
    const double t = quad::solve_bracketed([&](double x) { return measure(c, 0.0, x) - target; }, 0.0, 1.0, 1e-15);
    return nodes_[c] + spacing(c) * t;
}

bool RadialGrid::same_as(const RadialGrid& other) const {
    if (this == &other) return true;
    return nodes_ == other.nodes_ && manifold_.describe() == other.manifold_.describe();
}

// ============================================================ RadialFunction

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) fail(ErrorCode::InvalidArgument, "radial function without a grid");
    if (values_.size() != grid_->size()) fail(ErrorCode::GridMismatch, "value count does not match the grid");
    for (double v : values_) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "radial function values must be finite");
    }
}

RadialFunction RadialFunction::zero(GridPtr grid) {
    const std::size_t n = grid->size();
    return RadialFunction(std::move(grid), std::vector<double>(n, 0.0));
}

RadialFunction RadialFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid->size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid->nodes()[j]);
    return RadialFunction(std::move(grid), std::move(v));
}

double RadialFunction::at(double r) const {
    if (r > grid_->R() || r < 0.0) return 0.0;
    const int c = grid_->locate(r);
    const double t = (r - grid_->nodes()[c]) / grid_->spacing(c);
    return values_[c] + (values_[c + 1] - values_[c]) * t;
}

double RadialFunction::integral() const {
    double s = 0.0;
    const auto& mom = grid_->moments();
    for (int c = 0; c < grid_->cells(); ++c) s += values_[c] * (mom[c].m0 - mom[c].m1) + values_[c + 1] * mom[c].m1;
    return s;
}

std::vector<double> RadialFunction::cumulative() const {
    std::vector<double> out(values_.size(), 0.0);
    const auto& mom = grid_->moments();
    for (int c = 0; c < grid_->cells(); ++c) {
        out[c + 1] = out[c] + values_[c] * (mom[c].m0 - mom[c].m1) + values_[c + 1] * mom[c].m1;
    }
    return out;
}

double RadialFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool RadialFunction::nonnegative(double tol) const {
    return std::all_of(values_.begin(), values_.end(), [tol](double v) { return v >= -tol; });
}

bool RadialFunction::nonincreasing(double tol) const {
    for (std::size_t j = 1; j < values_.size(); ++j) {
        if (values_[j] > values_[j - 1] + tol) return false;
    }
    return true;
}

RadialFunction RadialFunction::scaled(double c) const {
    return map([c](double v) { return c * v; });
}

RadialFunction RadialFunction::map(const std::function<double(double)>& F) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), F);
    return RadialFunction(grid_, std::move(v));
}

// ===================================================================== norms

namespace {

void require_same_grid(const RadialFunction& f, const RadialFunction& g) {
    if (!f.grid().same_as(g.grid())) fail(ErrorCode::GridMismatch, "functions live on different grids");
}

// Calls fn(cell, t0, t1, v0, v1) for each sign-definite linear piece of f.
template <class Fn>
void for_each_signed_piece(const RadialFunction& f, Fn&& fn) {
    const auto& v = f.values();
    for (int c = 0; c < f.grid().cells(); ++c) {
        const double a = v[c], b = v[c + 1];
        if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
            const double tz = a / (a - b);
            fn(c, 0.0, tz, a, 0.0);
            fn(c, tz, 1.0, 0.0, b);
        } else {
            fn(c, 0.0, 1.0, a, b);
        }
    }
}

}  // namespace

double lp_norm(const RadialFunction& f, double p) {
    if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "exponent must be at least 1");
    if (std::isinf(p)) return f.max_abs();
    const auto& w = f.grid().weights();
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += w[j] * std::pow(std::abs(f[j]), p);
    return std::pow(s, 1.0 / p);
}

double integral_abs_pow(const RadialFunction& f, double p) {
    double s = 0.0;
    const RadialGrid& g = f.grid();
    for_each_signed_piece(f, [&](int c, double t0, double t1, double v0, double v1) {
        if (v0 == 0.0 && v1 == 0.0) return;
        const double slope = (v1 - v0) / (t1 - t0);
        s += g.integrate(c, t0, t1, [&](double t) { return std::pow(std::abs(v0 + slope * (t - t0)), p); });
    });
    return s;
}

double inner_product(const RadialFunction& f, const RadialFunction& g) {
    require_same_grid(f, g);
    const auto& mom = f.grid().moments();
    double s = 0.0;
    for (int c = 0; c < f.grid().cells(); ++c) {
        const double fa = f[c], df = f[c + 1] - f[c];
        const double ga = g[c], dg = g[c + 1] - g[c];
        s += fa * ga * mom[c].m0 + (fa * dg + ga * df) * mom[c].m1 + df * dg * mom[c].m2;
    }
    return s;
}

double l1_distance(const RadialFunction& f, const RadialFunction& g) {
    require_same_grid(f, g);
    std::vector<double> d(f.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = f[j] - g[j];
    return integral_abs_pow(RadialFunction(f.grid_ptr(), std::move(d)), 1.0);
}

// ============================================================= Rearrangement

Rearrangement::Rearrangement(const RadialFunction& f) : grid_(f.grid_ptr()) {
    const RadialGrid& g = *grid_;
    levels_.push_back(0.0);
    for_each_signed_piece(f, [&](int c, double t0, double t1, double v0, double v1) {
        const double g0 = std::abs(v0), g1 = std::abs(v1);
        if (g0 == 0.0 && g1 == 0.0) return;
        Piece p{c, t0, t1, g0, g1, 0.0, 0.0};
        p.mass = g.measure(c, t0, t1);
        const double slope = (g1 - g0) / (t1 - t0);
        p.first = g.integrate(c, t0, t1, [&](double t) { return g0 + slope * (t - t0); });
        pieces_.push_back(p);
        levels_.push_back(g0);
        levels_.push_back(g1);
    });
    std::sort(levels_.begin(), levels_.end());
    levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());

    const int K = static_cast<int>(levels_.size()) - 1;  // number of bands
    auto index_of = [&](double v) {
        return static_cast<int>(std::lower_bound(levels_.begin(), levels_.end(), v) - levels_.begin());
    };
    std::vector<double> mass_from(K + 2, 0.0);
    active_.assign(std::max(K, 0), {});
    for (int i = 0; i < static_cast<int>(pieces_.size()); ++i) {
        const Piece& p = pieces_[i];
        const int lo = index_of(std::min(p.g0, p.g1));
        const int hi = index_of(std::max(p.g0, p.g1));
        mass_from[lo] += p.mass;
        for (int k = lo; k < hi; ++k) active_[k].push_back(i);
    }
    // base_[k]: pieces whose minimum is at or above the top of band k.
    base_.assign(std::max(K, 0), 0.0);
    double suffix = 0.0;
    for (int k = K; k >= 1; --k) {
        suffix += mass_from[k];
        base_[k - 1] = suffix;
    }
    mu_at_.assign(K + 1, 0.0);
    mu_left_.assign(K + 1, 0.0);
    for (int k = 0; k < K; ++k) mu_at_[k] = mu_band(k, levels_[k]);
    for (int k = 1; k <= K; ++k) mu_left_[k] = mu_band(k - 1, levels_[k]);
    if (K > 0) mu_left_[0] = mu_at_[0];
}

double Rearrangement::upper_measure(const Piece& p, double t) const {
    if (p.g0 > t && p.g1 > t) return p.mass;
    if (p.g0 <= t && p.g1 <= t) return 0.0;
    const double tc = p.t0 + (p.t1 - p.t0) * (p.g0 - t) / (p.g0 - p.g1);
    return p.g0 > p.g1 ? grid_->measure(p.cell, p.t0, tc) : grid_->measure(p.cell, tc, p.t1);
}

double Rearrangement::mu_band(int band, double t) const {
    double s = base_[band];
    for (int i : active_[band]) s += upper_measure(pieces_[i], t);
    return s;
}

int Rearrangement::band_of(double t) const {
    const auto it = std::upper_bound(levels_.begin(), levels_.end(), t);
    return static_cast<int>(it - levels_.begin()) - 1;
}

double Rearrangement::mu(double t) const {
    if (t < 0.0) return grid_->total_volume();
    if (t >= max_value()) return 0.0;
    const int k = band_of(t);
    return t == levels_[k] ? mu_at_[k] : mu_band(k, t);
}

double Rearrangement::mu_derivative(double t) const {
    if (t < 0.0 || t >= max_value()) return 0.0;
    return mu_derivative_band(band_of(t), t);
}

double Rearrangement::mu_derivative_band(int k, double t) const {
    const RadialGrid& g = *grid_;
    double d = 0.0;
    for (int i : active_[k]) {
        const Piece& p = pieces_[i];
        const double tc = p.t0 + (p.t1 - p.t0) * (p.g0 - t) / (p.g0 - p.g1);
        d -= g.local_density(p.cell, tc) * g.spacing(p.cell) * (p.t1 - p.t0) / std::abs(p.g0 - p.g1);
    }
    return g.manifold().omega() * d;
}

double Rearrangement::value(double s) const {
    const int K = static_cast<int>(levels_.size()) - 1;
    if (K <= 0 || s >= mu_at_[0]) return 0.0;
    s = std::max(s, 0.0);
    // Smallest k ≥ 1 with μ(L_k) ≤ s; μ(L_K) = 0 guarantees existence.
    int lo = 1, hi = K;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (mu_at_[mid] <= s) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    const int k = lo;
    if (mu_left_[k] > s) return levels_[k];
    if (mu_left_[k] == s) return levels_[k];
    // Safeguarded Newton for μ(t) = s on the band (L_{k−1}, L_k), where μ decreases from
    // μ(L_{k−1}) to μ(L_k⁻). Residuals below the round-off floor of μ count as roots.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * mu_at_[k - 1];
    double t_lo = levels_[k - 1], t_hi = levels_[k];
    const double drop = mu_at_[k - 1] - mu_left_[k];
    double t = drop > 0.0 ? t_lo + (t_hi - t_lo) * (mu_at_[k - 1] - s) / drop : 0.5 * (t_lo + t_hi);
    for (int it = 0; it < 200; ++it) {
        const double excess = mu_band(k - 1, t) - s;
        if (std::abs(excess) <= noise) return t;
        (excess > 0.0 ? t_lo : t_hi) = t;
        const double slope = mu_derivative_band(k - 1, t);
        double next = slope < 0.0 ? t - excess / slope : 0.5 * (t_lo + t_hi);
        if (!(next > t_lo && next < t_hi)) next = 0.5 * (t_lo + t_hi);
        if (t_hi - t_lo <= 1e-15 * t_hi) return next;
        t = next;
    }
    return t;
}

double Rearrangement::excess(double t) const {
    const RadialGrid& g = *grid_;
    double s = 0.0;
    for (const Piece& p : pieces_) {
        const double lo = std::min(p.g0, p.g1), hi = std::max(p.g0, p.g1);
        if (hi <= t) continue;
        if (lo >= t) {
            s += p.first - t * p.mass;
            continue;
        }
        const double tc = p.t0 + (p.t1 - p.t0) * (p.g0 - t) / (p.g0 - p.g1);
        const double slope = (p.g1 - p.g0) / (p.t1 - p.t0);
        auto excess_at = [&](double x) { return p.g0 + slope * (x - p.t0) - t; };
        s += p.g0 > p.g1 ? g.integrate(p.cell, p.t0, tc, excess_at) : g.integrate(p.cell, tc, p.t1, excess_at);
    }
    return s;
}

double Rearrangement::cumulative(double V) const {
    if (V <= 0.0) return 0.0;
    const double tV = value(V);
    return excess(tV) + V * tV;
}

std::vector<double> Rearrangement::breakpoints() const {
    std::vector<double> b(mu_at_.begin(), mu_at_.end());
    b.insert(b.end(), mu_left_.begin(), mu_left_.end());
    b.push_back(0.0);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

// ================================================================ operations

SchwarzResult schwarz_rearrangement(const RadialFunction& f, bool allow_truncation) {
    if (!allow_truncation && f.values().back() != 0.0) {
        fail(ErrorCode::UnsupportedTail, "function does not vanish at the outer radius");
    }
    Rearrangement r(f);
    const auto& vols = f.grid().ball_volumes();
    std::vector<double> v(vols.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = r.value(vols[j]);
    return {std::move(r), RadialFunction(f.grid_ptr(), std::move(v))};
}

double distribution_function(const RadialFunction& f, double t) { return Rearrangement(f).mu(t); }

RadialFunction grid_rearrangement(const RadialFunction& f) {
    const auto& w = f.grid().weights();
    const std::size_t n = f.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(f[a]) > std::abs(f[b]); });
    std::vector<double> sorted_end(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += w[order[i]];
        sorted_end[i] = acc;
    }
    std::vector<double> out(n);
    double start = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double mid = start + 0.5 * w[j];
        start += w[j];
        const auto it = std::upper_bound(sorted_end.begin(), sorted_end.end(), mid);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - sorted_end.begin()), n - 1);
        out[j] = std::abs(f[order[i]]);
    }
    return RadialFunction(f.grid_ptr(), std::move(out));
}

RadialFunction dominating_rearrangement(const RadialFunction& f) {
    const Rearrangement fs(f);
    const RadialGrid& g = f.grid();
    const auto& mom = g.moments();
    const auto& vol = g.ball_volumes();
    const std::size_t n = f.size();
    std::vector<double> out(n);
    out[0] = fs.value(0.0);
    double mass = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double inner = mom[j].m0 - mom[j].m1, outer = mom[j].m1;
        const double needed = (fs.cumulative(vol[j + 1]) - mass - out[j] * inner) / outer;
        out[j + 1] = std::min(out[j], std::max(needed, fs.value(vol[j + 1])));
        mass += out[j] * inner + out[j + 1] * outer;
    }
    return RadialFunction(f.grid_ptr(), std::move(out));
}

namespace {

double integrate_pair_impl(const Rearrangement& f, const Rearrangement& g,
                           const std::function<double(double, double)>& F, bool split_at_crossings) {
    const RadialGrid& G = f.grid().total_volume() >= g.grid().total_volume() ? f.grid() : g.grid();
    const double vmax = std::min(std::max(f.support_volume(), g.support_volume()), G.total_volume());
    if (vmax <= 0.0) return 0.0;
    const double rmax = G.radius_of_volume(vmax);

    std::vector<double> radii;
    for (const auto* r : {&f, &g}) {
        for (double v : r->breakpoints()) {
            if (v < vmax) radii.push_back(G.radius_of_volume(v));
        }
    }
    for (double r : G.nodes()) {
        if (r < rmax) radii.push_back(r);
    }
    radii.push_back(rmax);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    auto values_at = [&](double r) {
        const double V = G.ball_volume(r);
        const double fv = f.value(V);
        return std::pair{fv, &f == &g ? fv : g.value(V)};
    };
    auto integrate_span = [&](double ra, double rb) {
        const int c = G.locate(0.5 * (ra + rb));
        const double a = G.nodes()[c], h = G.spacing(c);
        return G.integrate(c, (ra - a) / h, (rb - a) / h, [&](double t) {
            const auto [x, y] = values_at(a + h * t);
            return F(x, y);
        });
    };

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
        const double ra = radii[i], rb = radii[i + 1];
        if (!(rb > ra)) continue;
        if (split_at_crossings) {
            const auto [fa, ga] = values_at(ra);
            const auto [fb, gb] = values_at(rb);
            const double da = fa - ga, db = fb - gb;
            if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
                const double rc = quad::solve_bracketed(
                    [&](double r) {
                        const auto [x, y] = values_at(r);
                        return x - y;
                    },
                    ra, rb, 1e-15);
                total += integrate_span(ra, rc) + integrate_span(rc, rb);
                continue;
            }
        }
        total += integrate_span(ra, rb);
    }
    return total;
}

}  // namespace

double integrate_rearranged_pair(const Rearrangement& f, const Rearrangement& g,
                                 const std::function<double(double, double)>& F) {
    return integrate_pair_impl(f, g, F, false);
}

double hardy_littlewood_gap(const RadialFunction& f, const RadialFunction& g) {
    require_same_grid(f, g);
    const Rearrangement rf(f), rg(g);
    const double rearranged = integrate_pair_impl(rf, rg, [](double x, double y) { return x * y; }, false);
    return rearranged - inner_product(f, g);
}

double l1_distance_rearranged(const RadialFunction& f, const RadialFunction& g) {
    const Rearrangement rf(f), rg(g);
    return integrate_pair_impl(rf, rg, [](double x, double y) { return std::abs(x - y); }, true);
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Fails: return "fails";
        case Verdict::Borderline: return "borderline";
    }
    return "unknown";
}

ConcentrationReport concentration_compare(const RadialFunction& f, const RadialFunction& g,
                                          const ConcentrationOptions& opts) {
    if (!f.grid().same_as(g.grid())) {
        if (!opts.allow_resample) fail(ErrorCode::GridMismatch, "concentration comparison needs a shared grid");
        if (f.grid().manifold().describe() != g.grid().manifold().describe()) {
            fail(ErrorCode::GridMismatch, "functions live on different manifolds");
        }
    }
    const Rearrangement rf(f), rg(g);
    const double l1f = rf.excess(0.0), l1g = rg.excess(0.0);
    ConcentrationReport rep;
    rep.tol = opts.tol_scale * (opts.tol_report >= 0.0 ? opts.tol_report : 1e-8 * (l1f + l1g));
    rep.radii = f.grid().nodes();
    const auto& vols = f.grid().ball_volumes();
    rep.margins.resize(vols.size());
    for (std::size_t j = 0; j < vols.size(); ++j) rep.margins[j] = rg.cumulative(vols[j]) - rf.cumulative(vols[j]);
    rep.min_margin = *std::min_element(rep.margins.begin(), rep.margins.end());
    if (rep.min_margin < -rep.tol) {
        rep.verdict = Verdict::Fails;
        return rep;
    }
    rep.verdict = Verdict::Holds;
    if (!opts.cross_check) return rep;
    // Integrals of convex powers must be ordered as well.
    const double top = std::max(f.max_abs(), g.max_abs());
    for (double p : {1.0, 2.0, 4.0}) {
        const double If = integral_abs_pow(f, p), Ig = integral_abs_pow(g, p);
        const double gap = Ig - If;
        rep.power_gaps.push_back(gap);
        const double slack = p * std::pow(top, p - 1.0) * rep.tol + 1e-12 * (If + Ig);
        if (gap < -slack) {
            rep.verdict = Verdict::Borderline;
            rep.note = "integral of |.|^" + std::to_string(static_cast<int>(p)) + " is not ordered";
        }
    }
    return rep;
}

}  // namespace radflow
