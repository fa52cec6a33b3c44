#include "radflow/error.hpp"
#include "radflow/manifold.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using radflow::ErrorCode;
using radflow::ModelManifold;
using radflow::Parabolicity;

namespace {
constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const radflow::Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}
}  // namespace

TEST(Manifold, BuiltinProfiles) {
    const auto e = ModelManifold::euclidean(3);
    EXPECT_EQ(e.psi(1.0), 1.0);
    EXPECT_EQ(e.profile(1.0).dpsi, 1.0);
    EXPECT_EQ(e.profile(1.0).ddpsi, 0.0);
    EXPECT_NEAR(ModelManifold::hyperbolic(2).psi(1.0), 1.1752011936438014, 1e-15);
}

TEST(Manifold, ExpressionProfileAdmissibility) {
    const auto m = ModelManifold::from_expression(2, "r*exp(-r^2)");
    EXPECT_NEAR(m.profile(0.0).dpsi, 1.0, 1e-15);
    EXPECT_NEAR(m.G_total(), 0.5, 1e-12);
    EXPECT_EQ(code_of([] { (void)ModelManifold::from_expression(2, "2*r"); }), ErrorCode::InvalidProfile);
    EXPECT_EQ(code_of([] { (void)ModelManifold::from_expression(2, "r + 1"); }), ErrorCode::InvalidProfile);
    EXPECT_EQ(code_of([] { (void)ModelManifold::from_expression(2, "sin(r)"); }), ErrorCode::NonPositiveProfile);
}

TEST(Manifold, VolumesAndPerimeters) {
    EXPECT_NEAR(ModelManifold::euclidean(3).volume_ball(1.0), 4.0 * kPi / 3.0, 1e-12);
    EXPECT_EQ(ModelManifold::hyperbolic(2).volume_ball(0.0), 0.0);
    EXPECT_NEAR(ModelManifold::hyperbolic(2).volume_ball(1.0), 2 * kPi * (std::cosh(1.0) - 1.0), 1e-12);
    EXPECT_NEAR(ModelManifold::euclidean(2).perimeter_ball(2.0), 4 * kPi, 1e-13);
    EXPECT_NEAR(ModelManifold::hyperbolic(3).perimeter_ball(1.0), 4 * kPi * std::pow(std::sinh(1.0), 2), 1e-12);
    EXPECT_NEAR(ModelManifold::sphere(2).total_volume(), 4 * kPi, 1e-12);
    EXPECT_EQ(code_of([] { (void)ModelManifold::sphere(2).volume_ball(4.0); }), ErrorCode::DomainExceeded);
}

TEST(Manifold, RadiusOfVolume) {
    EXPECT_NEAR(ModelManifold::euclidean(2).radius_of_volume(kPi), 1.0, 1e-12);
    EXPECT_EQ(ModelManifold::euclidean(2).radius_of_volume(0.0), 0.0);
    EXPECT_NEAR(ModelManifold::hyperbolic(2).radius_of_volume(2 * kPi * (std::cosh(1.0) - 1.0)), 1.0, 1e-10);
    EXPECT_EQ(code_of([] { (void)ModelManifold::sphere(2).radius_of_volume(13.0); }), ErrorCode::VolumeExceedsManifold);
    const auto finite = ModelManifold::from_expression(2, "r*exp(-r^2)");
    EXPECT_EQ(code_of([&] { (void)finite.radius_of_volume(2 * kPi * 0.6); }), ErrorCode::VolumeExceedsManifold);
}

TEST(Manifold, RoundTripAndMonotonicity) {
    std::mt19937_64 rng(3);
    for (const auto& m : {ModelManifold::euclidean(2), ModelManifold::hyperbolic(3), ModelManifold::sphere(2)}) {
        const double vmax = m.compact() ? 0.999 * m.total_volume() : m.volume_ball(5.0);
        std::uniform_real_distribution<double> vs(1e-6, vmax);
        for (int i = 0; i < 100; ++i) {
            const double V = vs(rng);
            EXPECT_NEAR(m.volume_ball(m.radius_of_volume(V)), V, 1e-8 * V);
        }
        double prev = -1.0;
        for (int i = 0; i <= 60; ++i) {
            const double v = m.volume_ball(0.05 * i);
            EXPECT_GT(v, prev);
            prev = v;
        }
        std::uniform_real_distribution<double> rs(0.1, 3.0);
        for (int i = 0; i < 50; ++i) {
            const double r = rs(rng), h = 1e-4;
            const double d = (m.volume_ball(r + h) - m.volume_ball(r - h)) / (2 * h);
            EXPECT_NEAR(d, m.perimeter_ball(r), 1e-6 * m.perimeter_ball(r));
        }
    }
}

TEST(Manifold, CurvatureClosedForms) {
    for (int n = 2; n <= 4; ++n) {
        const auto e = ModelManifold::euclidean(n);
        const auto h = ModelManifold::hyperbolic(n);
        const auto s = ModelManifold::sphere(n);
        for (int i = 0; i < 50; ++i) {
            const double r = 0.06 * i;
            EXPECT_NEAR(e.curvatures(r).S, 0.0, 1e-9);
            EXPECT_NEAR(h.curvatures(r).S, -n * (n - 1.0), 1e-9);
            EXPECT_NEAR(h.curvatures(r).K_rad, -1.0, 1e-9);
            EXPECT_NEAR(h.curvatures(r).K_perp, -1.0, 1e-9);
            EXPECT_NEAR(s.curvatures(r).S, n * (n - 1.0), 1e-9);
            EXPECT_NEAR(s.curvatures(r).Ric_perp, n - 1.0, 1e-9);
        }
    }
    EXPECT_NEAR(ModelManifold::hyperbolic(3).curvatures(1.0).S, -6.0, 1e-12);
    const auto cubic = ModelManifold::from_expression(2, "r + r^3");
    EXPECT_NEAR(cubic.curvatures(0.0).S, -12.0, 1e-8);
    EXPECT_NEAR(cubic.curvatures(1.0).S, -6.0, 1e-12);
    EXPECT_NEAR(cubic.curvatures(0.5).S, -12.0 / 1.25, 1e-12);
}

TEST(Manifold, SmallBallExpansion) {
    EXPECT_DOUBLE_EQ(radflow::smallball_expansion(0.0, 0.3, 2).vol_approx, kPi * 0.09);
    const auto sb = radflow::smallball_expansion(2.0, 0.1, 2);
    EXPECT_NEAR(sb.vol_approx, 2 * kPi * (1 - std::cos(0.1)), 1e-6);
    // S r²/(6n) = 2·0.01/12 for S=2, n=2.
    EXPECT_NEAR(sb.area_approx, 2 * kPi * 0.1 * (1 - 0.02 / 12), 1e-12);
    EXPECT_NEAR(sb.area_approx, 2 * kPi * std::sin(0.1), 1e-5);
    for (const auto& m : {ModelManifold::sphere(2), ModelManifold::hyperbolic(2), ModelManifold::sphere(3)}) {
        const double S0 = m.curvatures(0.0).S;
        auto err = [&](double r) {
            return std::abs(radflow::smallball_expansion(S0, r, m.dim()).vol_approx - m.volume_ball(r));
        };
        EXPECT_GE(err(0.2) / err(0.1), 16.0 * 0.8);
    }
}

TEST(Manifold, Parabolicity) {
    EXPECT_EQ(ModelManifold::euclidean(2).is_parabolic(), Parabolicity::Parabolic);
    EXPECT_EQ(ModelManifold::euclidean(3).is_parabolic(), Parabolicity::Nonparabolic);
    EXPECT_EQ(ModelManifold::hyperbolic(2).is_parabolic(), Parabolicity::Nonparabolic);
    EXPECT_EQ(code_of([] { (void)ModelManifold::sphere(2).is_parabolic(); }), ErrorCode::CompactProfile);
}

TEST(Manifold, TableProfile) {
    std::vector<double> r, p;
    for (int i = 0; i <= 400; ++i) {
        r.push_back(0.01 * i);
        p.push_back(std::sinh(0.01 * i));
    }
    const auto m = ModelManifold::from_table(2, r, p);
    EXPECT_NEAR(m.psi(1.234), std::sinh(1.234), 1e-6);
    EXPECT_NEAR(m.profile(1.234).dpsi, std::cosh(1.234), 1e-4);
    EXPECT_NEAR(m.volume_ball(2.0), 2 * kPi * (std::cosh(2.0) - 1), 1e-5);
    EXPECT_NO_THROW((void)m.volume_ball(4.0));
    EXPECT_EQ(code_of([&] { (void)m.volume_ball(4.5); }), ErrorCode::DomainExceeded);
    EXPECT_EQ(code_of([] { (void)ModelManifold::from_table(2, {0, 0.1, 0.2}, {0, 0.3, 0.5}); }), ErrorCode::InvalidProfile);
}
