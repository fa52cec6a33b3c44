#include "radflow/manifold.hpp"

#include "radflow/error.hpp"
#include "radflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace radflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAdmissTol = 1e-9;
constexpr double kPoleEps = 1e-4;

}  // namespace

std::string_view to_string(ProfileKind kind) noexcept {
    switch (kind) {
        case ProfileKind::Euclidean: return "euclidean";
        case ProfileKind::Hyperbolic: return "hyperbolic";
        case ProfileKind::Sphere: return "sphere";
        case ProfileKind::Expression: return "expression";
        case ProfileKind::Table: return "table";
    }
    return "unknown";
}

std::string_view to_string(Parabolicity p) noexcept {
    switch (p) {
        case Parabolicity::Parabolic: return "parabolic";
        case Parabolicity::Nonparabolic: return "nonparabolic";
        case Parabolicity::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

double unit_sphere_area(int n) {
    const double half = 0.5 * n;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

SmallBallExpansion smallball_expansion(double S_at_center, double r, int n) {
    const double w = unit_sphere_area(n);
    const double rn1 = std::pow(r, n - 1);
    SmallBallExpansion out;
    out.vol_approx = (w / n) * rn1 * r * (1.0 - S_at_center * r * r / (6.0 * (n + 2)));
    out.area_approx = w * rn1 * (1.0 - S_at_center * r * r / (6.0 * n));
    return out;
}

// ------------------------------------------------------------ TableProfile

TableProfile::TableProfile(std::vector<double> r, std::vector<double> psi)
    : r_(std::move(r)), y_(std::move(psi)) {
    const std::size_t m = r_.size();
    if (m < 3 || y_.size() != m) fail(ErrorCode::InvalidProfile, "table needs at least 3 matching (r, psi) samples");
    for (std::size_t i = 1; i < m; ++i) {
        if (!(r_[i] > r_[i - 1])) fail(ErrorCode::InvalidProfile, "table radii must be strictly increasing");
    }
    std::vector<double> h(m - 1), delta(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        h[i] = r_[i + 1] - r_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(m, 0.0);
    d_[0] = 1.0;
    for (std::size_t k = 1; k + 1 < m; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    // Three-point end slope at the last knot, limited as in PCHIP.
    const std::size_t e = m - 1;
    const double h0 = h[e - 1], h1 = h[e - 2];
    const double del0 = delta[e - 1], del1 = delta[e - 2];
    double de = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (de * del0 <= 0.0) {
        de = 0.0;
    } else if (del0 * del1 <= 0.0 && std::abs(de) > 3.0 * std::abs(del0)) {
        de = 3.0 * del0;
    }
    d_[e] = de;
}

ProfileJet TableProfile::eval(double r) const {
    const std::size_t m = r_.size();
    std::size_t k = 0;
    if (r >= r_[m - 1]) {
        k = m - 2;
    } else if (r > r_[0]) {
        k = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
    }
    const double h = r_[k + 1] - r_[k];
    const double t = (r - r_[k]) / h;
    const double y0 = y_[k], y1 = y_[k + 1], d0 = d_[k], d1 = d_[k + 1];
    const double t2 = t * t, t3 = t2 * t;
    ProfileJet j;
    j.psi = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
    j.dpsi = ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
    j.ddpsi = ((12 * t - 6) * y0 + (-12 * t + 6) * y1) / (h * h) + ((6 * t - 4) * d0 + (6 * t - 2) * d1) / h;
    return j;
}

// ----------------------------------------------------------- construction

ModelManifold ModelManifold::make(const ManifoldSpec& spec) {
    if (spec.n < 2) fail(ErrorCode::InvalidProfile, "dimension must be at least 2");
    ModelManifold m;
    m.spec_ = spec;
    m.n_ = spec.n;
    m.kind_ = spec.kind;
    m.omega_ = unit_sphere_area(spec.n);
    switch (spec.kind) {
        case ProfileKind::Euclidean:
        case ProfileKind::Hyperbolic: break;
        case ProfileKind::Sphere: m.r_dom_ = std::numbers::pi; break;
        case ProfileKind::Expression: m.expression_ = expr::Expr::parse(spec.expression, "r"); break;
        case ProfileKind::Table: {
            if (spec.table_r.empty() || spec.table_r.front() != 0.0) {
                fail(ErrorCode::InvalidProfile, "table radii must start at 0");
            }
            m.table_ = TableProfile(spec.table_r, spec.table_psi);
            m.r_dom_ = spec.table_r.back();
            break;
        }
    }
    m.validate();
    return m;
}

ModelManifold ModelManifold::euclidean(int n) { return make({n, ProfileKind::Euclidean, {}, {}, {}}); }
ModelManifold ModelManifold::hyperbolic(int n) { return make({n, ProfileKind::Hyperbolic, {}, {}, {}}); }
ModelManifold ModelManifold::sphere(int n) { return make({n, ProfileKind::Sphere, {}, {}, {}}); }

ModelManifold ModelManifold::from_expression(int n, const std::string& source) {
    return make({n, ProfileKind::Expression, source, {}, {}});
}

ModelManifold ModelManifold::from_table(int n, std::vector<double> r, std::vector<double> psi) {
    return make({n, ProfileKind::Table, {}, std::move(r), std::move(psi)});
}

void ModelManifold::validate() {
    ProfileJet at0;
    try {
        at0 = profile(0.0);
    } catch (const Error& e) {
        fail(ErrorCode::InvalidProfile, std::string("profile cannot be evaluated at the pole: ") + e.what());
    }
    if (std::abs(at0.psi) > kAdmissTol) fail(ErrorCode::InvalidProfile, "profile must vanish at the pole");
    if (kind_ == ProfileKind::Table) {
        // Sampled data cannot pin the derivative to 1e-9; require the first secant
        // to approach 1 at the rate allowed by the first spacing.
        const double h = spec_.table_r[1];
        const double secant = spec_.table_psi[1] / h;
        if (std::abs(secant - 1.0) > kAdmissTol + h) {
            fail(ErrorCode::InvalidProfile, "first secant of the table is incompatible with unit slope at the pole");
        }
    } else if (std::abs(at0.dpsi - 1.0) > kAdmissTol) {
        fail(ErrorCode::InvalidProfile, "profile must have unit slope at the pole");
    }

    const double upper = std::min(r_dom_, 20.0);
    constexpr int kSamples = 2000;
    for (int i = 1; i < kSamples; ++i) {
        const double r = upper * i / kSamples;
        double v = 0.0;
        try {
            v = psi(r);
        } catch (const Error& e) {
            fail(ErrorCode::InvalidProfile, "profile cannot be evaluated at r=" + std::to_string(r) + ": " + e.what());
        }
        if (!(v > 0.0)) fail(ErrorCode::NonPositiveProfile, "profile is not positive at r=" + std::to_string(r));
    }

    if (compact()) {
        g_total_ = G_between(0.0, r_dom_);
        return;
    }
    if (kind_ == ProfileKind::Euclidean || kind_ == ProfileKind::Hyperbolic) {
        g_total_ = kInf;
        return;
    }
    // Expression profiles: detect a finite total by stagnation of G.
    double prev = G(40.0);
    double next = prev + G_between(40.0, 80.0);
    if (std::isfinite(next) && next - prev <= 1e-14 * next) {
        g_total_ = next;
    } else {
        g_total_ = kInf;
    }
}

std::string ModelManifold::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << " n=" << n_;
    if (kind_ == ProfileKind::Expression) os << " psi=" << expression_.to_string();
    if (kind_ == ProfileKind::Table) os << " knots=" << spec_.table_r.size();
    return os.str();
}

// -------------------------------------------------------------- profile

ProfileJet ModelManifold::profile(double r) const {
    switch (kind_) {
        case ProfileKind::Euclidean: return {r, 1.0, 0.0};
        case ProfileKind::Hyperbolic: {
            const double s = std::sinh(r);
            return {s, std::cosh(r), s};
        }
        case ProfileKind::Sphere: {
            const double s = std::sin(r);
            return {s, std::cos(r), -s};
        }
        case ProfileKind::Expression: {
            const expr::Jet j = expression_.eval_jet(r);
            return {j.value, j.d1, j.d2};
        }
        case ProfileKind::Table: return table_.eval(r);
    }
    return {};
}

double ModelManifold::density(double r) const {
    const double p = psi(r);
    return n_ == 2 ? p : std::pow(p, n_ - 1);
}

double ModelManifold::dpsi_sq_minus_one(double r) const {
    switch (kind_) {
        case ProfileKind::Euclidean: return 0.0;
        case ProfileKind::Hyperbolic: {
            const double s = std::sinh(r);
            return s * s;
        }
        case ProfileKind::Sphere: {
            const double s = std::sin(r);
            return -s * s;
        }
        default: {
            const double d = profile(r).dpsi;
            return (d - 1.0) * (d + 1.0);
        }
    }
}

void ModelManifold::check_radius(double r) const {
    if (!(r >= 0.0)) fail(ErrorCode::DomainExceeded, "radius must be nonnegative");
    const bool closed = kind_ == ProfileKind::Table;
    if (closed ? r > r_dom_ : r >= r_dom_) {
        fail(ErrorCode::DomainExceeded, "radius " + std::to_string(r) + " outside the profile domain");
    }
}

// ------------------------------------------------------------ volumes

double ModelManifold::G_between(double a, double b) const {
    if (b <= a) return 0.0;
    auto f = [this](double r) { return density(r); };
    double sum = 0.0;
    if (kind_ == ProfileKind::Table) {
        // The interpolant is a cubic per knot interval, so Gauss–Legendre is exact
        // there for moderate dimensions.
        const auto& knots = spec_.table_r;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            const double lo = std::max(a, knots[k]), hi = std::min(b, knots[k + 1]);
            if (hi > lo) sum += quad::gauss(f, lo, hi);
        }
        return sum;
    }
    // Panels of bounded width; later panels only need accuracy relative to the
    // accumulated total.
    const double width = 2.0;
    for (double lo = a; lo < b; lo += width) {
        sum += quad::adaptive(f, lo, std::min(b, lo + width), 1e-13, std::max(1e-290, 1e-17 * sum));
    }
    return sum;
}

double ModelManifold::G(double r) const { return G_between(0.0, r); }

double ModelManifold::G_total() const { return g_total_; }

double ModelManifold::volume_ball(double r) const {
    check_radius(r);
    return omega_ * G(r);
}

double ModelManifold::perimeter_ball(double r) const {
    check_radius(r);
    return omega_ * density(r);
}

double ModelManifold::radius_of_G(double g) const {
    if (!(g >= 0.0)) fail(ErrorCode::InvalidArgument, "volume must be nonnegative");
    if (g == 0.0) return 0.0;
    if (g >= g_total_) fail(ErrorCode::VolumeExceedsManifold, "volume exceeds the total volume of the manifold");
    double lo = 0.0, glo = 0.0;
    double hi = compact() ? r_dom_ : 1.0;
    double ghi = compact() ? g_total_ : G(hi);
    while (ghi < g) {
        lo = hi;
        glo = ghi;
        hi *= 2.0;
        ghi = glo + G_between(lo, hi);
        if (hi > 1e6) fail(ErrorCode::VolumeExceedsManifold, "volume not reached by the profile");
    }
    auto residual = [&](double r) { return glo + G_between(lo, r) - g; };
    return quad::solve_bracketed(residual, lo, hi, 1e-15);
}

double ModelManifold::radius_of_volume(double V) const { return radius_of_G(V / omega_); }

// ----------------------------------------------------------- curvature

Curvatures ModelManifold::curvatures_raw(double r) const {
    const ProfileJet j = profile(r);
    const double ratio2 = j.ddpsi / j.psi;
    const double perp = -dpsi_sq_minus_one(r) / (j.psi * j.psi);
    Curvatures c;
    c.K_rad = -ratio2;
    c.K_perp = perp;
    c.Ric_rad = (n_ - 1) * c.K_rad;
    c.Ric_perp = c.K_rad + (n_ - 2) * c.K_perp;
    c.S = -(n_ - 1) * (2.0 * ratio2 - (n_ - 2) * perp);
    return c;
}

Curvatures ModelManifold::curvatures(double r) const {
    check_radius(r);
    if (r >= kPoleEps) return curvatures_raw(r);
    // The formulas are 0/0 at the pole; extrapolate the even expansion in r.
    const Curvatures a = curvatures_raw(kPoleEps);
    const Curvatures b = curvatures_raw(2.0 * kPoleEps);
    auto limit = [](double va, double vb) { return (4.0 * va - vb) / 3.0; };
    Curvatures at0{limit(a.K_rad, b.K_rad), limit(a.K_perp, b.K_perp), limit(a.Ric_rad, b.Ric_rad),
                   limit(a.Ric_perp, b.Ric_perp), limit(a.S, b.S)};
    if (r == 0.0) return at0;
    const double w = (r / kPoleEps) * (r / kPoleEps);
    auto blend = [w](double v0, double va) { return v0 + (va - v0) * w; };
    return {blend(at0.K_rad, a.K_rad), blend(at0.K_perp, a.K_perp), blend(at0.Ric_rad, a.Ric_rad),
            blend(at0.Ric_perp, a.Ric_perp), blend(at0.S, a.S)};
}

Parabolicity ModelManifold::is_parabolic() const {
    if (compact()) fail(ErrorCode::CompactProfile, "parabolicity is defined for noncompact profiles");
    auto f = [this](double r) { return std::pow(psi(r), 1 - n_); };
    auto piece = [&](double a, double b) {
        double s = 0.0;
        for (double lo = a; lo < b; lo += 2.0) s += quad::adaptive(f, lo, std::min(b, lo + 2.0));
        return s;
    };
    const double i1 = piece(10.0, 20.0);
    const double i2 = piece(20.0, 40.0);
    const double i3 = piece(40.0, 80.0);
    if (!std::isfinite(i1) || !std::isfinite(i2) || !std::isfinite(i3)) return Parabolicity::Parabolic;
    constexpr double slack = 1e-9;
    const double half = 0.5 * (1.0 + slack);
    if (i2 <= half * i1 && i3 <= half * i2) return Parabolicity::Nonparabolic;
    if (i2 >= i1 * (1.0 - slack) && i3 >= i2 * (1.0 - slack)) return Parabolicity::Parabolic;
    return Parabolicity::Inconclusive;
}

}  // namespace radflow
