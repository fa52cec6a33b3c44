#pragma once

#include "radflow/manifold.hpp"
#include "radflow/parallel.hpp"
#include "radflow/radial.hpp"

#include <optional>
#include <vector>

namespace radflow {

/// ∫ |f′|² dV for the piecewise-linear model: Σ slope² · (cell volume).
double dirichlet_energy(const RadialFunction& f);

/// ∫ |∇f⋆|² dV for the exact rearrangement of a piecewise-linear f, by the coarea
/// identity |(f⋆)′(ρ)| = P(ρ)/|μ′(f⋆(ρ))| integrated in the radius of f⋆.
double rearranged_energy(const Rearrangement& f_star);

struct PolyaVerdict {
    double energy_original = 0.0;
    double energy_rearranged = 0.0;
    double ratio = 0.0;  // energy_rearranged / energy_original
    bool holds = true;   // ratio ≤ 1 + tol
    std::optional<RadialFunction> witness;
};

/// Throws ZeroEnergy for constant f and UnsupportedTail unless f(R) = 0.
PolyaVerdict radial_polya_ratio(const RadialFunction& f, double tol = 1e-6);

struct NazarovOptions {
    int grid_size = 128;   // log-uniform points per axis, at least 32
    double r_min = 1e-3;   // smallest radius whose G value is scanned
    double r_max = 10.0;   // largest radius for infinite-volume profiles
    double tol = 1e-12;    // relative slack threshold
    Exec exec = Exec::Parallel;
};

struct NazarovRow {
    double mu = 0.0;
    double worst_nu = 0.0;
    double slack = 0.0;  // a(μ+ν) + a(ν) − a(μ) at the worst ν
};

/// Subadditivity scan of a(y) = ψ(G⁻¹(y))^(n−1): a(μ) ≤ a(μ+ν) + a(ν).
struct NazarovResult {
    bool pass = true;
    double worst_slack = 0.0;
    double worst_relative = 0.0;  // slack / a(μ)
    double mu = 0.0;
    double nu = 0.0;
    std::vector<NazarovRow> rows;  // worst ν for every scanned μ
};

NazarovResult nazarov_check(const ModelManifold& m, const NazarovOptions& opts = {});

/// ωₙ[ψ(a)^(n−1) + ψ(b)^(n−1)] − P(radius of a ball with the annulus volume).
double annulus_isoperimetric_check(const ModelManifold& m, double a, double b);

/// Annulus tents f(r) = min(r − a, b − r)⁺ with a on a uniform grid and b = a + width.
struct TentFamily {
    double a_min = 0.0;
    double a_max = 3.0;
    int a_count = 16;
    double width_min = 0.1;
    double width_max = 1.5;
    int width_count = 8;
    int cells_per_segment = 8;
    double tol = 1e-6;
    Exec exec = Exec::Parallel;
};

struct TentSample {
    double a = 0.0;
    double b = 0.0;
    double ratio = 0.0;
};

struct ViolationSearch {
    TentSample best;
    std::optional<RadialFunction> witness;  // present when best.ratio > 1 + tol
    std::vector<TentSample> samples;
};

/// Builds the tent on a grid with nodes at a, the apex and b.
RadialFunction make_tent(const ModelManifold& m, double a, double b, int cells_per_segment = 8);

ViolationSearch find_radial_violation(const ModelManifold& m, const TentFamily& family = {});

/// ρ²-coefficients of the small-ball comparison between a centred tent at a point
/// at distance r_hat and its Schwarz rearrangement.
struct CurvatureGap {
    double S_o = 0.0;
    double S_hat = 0.0;
    /// −Ŝ/(6(n+2)): energy of the tent, normalised by (ωₙ/n)ρ^(n−2).
    double coeff_original = 0.0;
    /// −Ŝ/(6(n+2)) + (n−1)(Ŝ − S_o)/(3(n+2)²): series expansion of the Hölder lower bound.
    double coeff_lowerbound = 0.0;
    /// −Ŝ/(6(n+2)) + ((n−1)Ŝ − S_o)/(3(n+2)²), with (n−1) applied to Ŝ only; equals
    /// coeff_lowerbound when n = 2.
    double coeff_lowerbound_reference = 0.0;
    /// (n−1)(Ŝ − S_o)/(6(n+2)²): correction inside the coarea bracket before squaring.
    double coeff_bracket = 0.0;
    /// Lower-bound coefficient re-derived with the boundary-area expansion of the
    /// rearranged balls taken at the pole: (Ŝ/6 − S_o/3)/(n+2) + (n−1)(S_o − Ŝ)/(3(n+2)²).
    double coeff_lowerbound_direct = 0.0;
    double gap = 0.0;          // coeff_lowerbound − coeff_original
    double gap_reference = 0.0;  // coeff_lowerbound_reference − coeff_original
    double gap_direct = 0.0;   // coeff_lowerbound_direct − coeff_original = (Ŝ − S_o)/(n+2)²
};

/// Throws DomainExceeded unless 0 < r_hat < R_dom.
CurvatureGap curvature_gap(const ModelManifold& m, double r_hat);

}  // namespace radflow
