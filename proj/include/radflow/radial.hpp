#pragma once

#include "radflow/manifold.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace radflow {

/// ω∫ tᵏ ψ^(n-1) dr over one cell, with t = (r − r_c)/h_c ∈ [0, 1].
struct CellMoments {
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
};

class RadialGrid;
using GridPtr = std::shared_ptr<const RadialGrid>;

/// Nodes 0 = r₀ < … < r_M = R on a model manifold with exact cell moments of the
/// radial measure. Weights are the hat-function (lumped) masses, which sum to V(B_R).
class RadialGrid {
public:
    static GridPtr uniform(const ModelManifold& m, double R, int cells);
    static GridPtr from_nodes(const ModelManifold& m, std::vector<double> nodes);

    [[nodiscard]] const ModelManifold& manifold() const noexcept { return manifold_; }
    [[nodiscard]] double R() const noexcept { return nodes_.back(); }
    [[nodiscard]] int cells() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] const std::vector<CellMoments>& moments() const noexcept { return moments_; }
    /// V(B_{r_j}) for every node.
    [[nodiscard]] const std::vector<double>& ball_volumes() const noexcept { return ball_volumes_; }
    [[nodiscard]] double spacing(int cell) const { return nodes_[cell + 1] - nodes_[cell]; }
    [[nodiscard]] double max_spacing() const noexcept { return max_spacing_; }
    [[nodiscard]] double total_volume() const noexcept { return ball_volumes_.back(); }

    /// Cell containing r (the last cell for r = R).
    [[nodiscard]] int locate(double r) const;
    /// ω∫ ψ^(n-1) over the local sub-interval [t0, t1] of a cell.
    [[nodiscard]] double measure(int cell, double t0, double t1) const;
    /// ω∫ F(t) ψ^(n-1) dr over the local sub-interval [t0, t1] of a cell (Gauss–Legendre).
    [[nodiscard]] double integrate(int cell, double t0, double t1, const std::function<double(double)>& F) const;
    /// ψ^(n-1) at local coordinate t ∈ [0, 1] of a cell.
    [[nodiscard]] double local_density(int cell, double t) const;
    /// V(B_r) from the stored moments plus one partial cell.
    [[nodiscard]] double ball_volume(double r) const;
    /// Inverse of ball_volume on [0, V(B_R)].
    [[nodiscard]] double radius_of_volume(double V) const;

    /// True when both grids have identical nodes on the same manifold description.
    [[nodiscard]] bool same_as(const RadialGrid& other) const;

    /// Degree of the per-cell Legendre expansion of the density behind measure().
    static constexpr int kDensityDegree = 15;

private:
    RadialGrid(const ModelManifold& m, std::vector<double> nodes);
    void expand_density();
    /// ∫ ψ^(n-1) over local [0, t] of an expanded cell, in units of h/2.
    [[nodiscard]] double expanded_antiderivative(int cell, double t) const;

    ModelManifold manifold_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<CellMoments> moments_;
    std::vector<double> ball_volumes_;
    double max_spacing_ = 0.0;
    /// Legendre coefficients of the density on each cell, mapped to [−1, 1]; cells whose
    /// expansion does not converge fall back to direct quadrature.
    std::vector<std::array<double, kDensityDegree + 1>> density_legendre_;
    std::vector<int> density_degree_;
    std::vector<bool> expanded_;
};

/// Samples at grid nodes, interpreted piecewise-linearly in r and as zero beyond R.
class RadialFunction {
public:
    RadialFunction() = default;
    RadialFunction(GridPtr grid, std::vector<double> values);

    static RadialFunction zero(GridPtr grid);
    static RadialFunction sample(GridPtr grid, const std::function<double(double)>& f);

    [[nodiscard]] const RadialGrid& grid() const { return *grid_; }
    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t j) const { return values_[j]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    /// Piecewise-linear value at r (0 beyond R).
    [[nodiscard]] double at(double r) const;
    /// Exact ∫ f dV for the piecewise-linear model.
    [[nodiscard]] double integral() const;
    /// Exact ∫_{B_{r_j}} f dV at every node.
    [[nodiscard]] std::vector<double> cumulative() const;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool nonnegative(double tol = 0.0) const;
    [[nodiscard]] bool nonincreasing(double tol = 0.0) const;

    [[nodiscard]] RadialFunction scaled(double c) const;
    [[nodiscard]] RadialFunction map(const std::function<double(double)>& F) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Lumped-weight norm (Σ w_j |f_j|^p)^(1/p); p = ∞ gives the largest nodal |f_j|.
double lp_norm(const RadialFunction& f, double p);
/// Exact ∫ |f|^p dV for the piecewise-linear model.
double integral_abs_pow(const RadialFunction& f, double p);
/// Exact ∫ f g dV.
double inner_product(const RadialFunction& f, const RadialFunction& g);
/// Exact ∫ |f − g| dV.
double l1_distance(const RadialFunction& f, const RadialFunction& g);

/// Decreasing rearrangement f* of |f| on the volume half-line, computed exactly for
/// the piecewise-linear model: level sets are located by linear inversion inside
/// each cell and measured with the grid's radial measure.
class Rearrangement {
public:
    explicit Rearrangement(const RadialFunction& f);

    /// μ(t) = V({|f| > t}) for t ≥ 0.
    [[nodiscard]] double mu(double t) const;
    /// dμ/dt inside a band of levels.
    [[nodiscard]] double mu_derivative(double t) const;
    /// f*(s) = sup{t : μ(t) > s}.
    [[nodiscard]] double value(double s) const;
    /// ∫₀ⱽ f*(s) ds.
    [[nodiscard]] double cumulative(double V) const;
    /// ∫ (|f| − t)⁺ dV.
    [[nodiscard]] double excess(double t) const;

    [[nodiscard]] double support_volume() const noexcept { return mu_at_.empty() ? 0.0 : mu_at_.front(); }
    [[nodiscard]] double max_value() const noexcept { return levels_.empty() ? 0.0 : levels_.back(); }
    /// Sorted distinct nodal levels of |f|, including 0.
    [[nodiscard]] const std::vector<double>& levels() const noexcept { return levels_; }
    /// Volumes where f* may fail to be smooth, sorted, within [0, support_volume()].
    [[nodiscard]] std::vector<double> breakpoints() const;
    [[nodiscard]] const RadialGrid& grid() const { return *grid_; }

private:
    struct Piece {
        int cell;
        double t0, t1;  // local coordinates within the cell
        double g0, g1;  // |f| at t0 and t1
        double mass;    // ω∫ ψ^(n-1) over the piece
        double first;   // ∫ |f| dV over the piece
    };

    [[nodiscard]] int band_of(double t) const;
    [[nodiscard]] double mu_band(int band, double t) const;
    [[nodiscard]] double mu_derivative_band(int band, double t) const;
    [[nodiscard]] double upper_measure(const Piece& p, double t) const;

    GridPtr grid_;
    std::vector<Piece> pieces_;
    std::vector<double> levels_;
    std::vector<double> base_;                 // per band: mass of pieces entirely above the band
    std::vector<std::vector<int>> active_;     // per band: pieces crossing the band
    std::vector<double> mu_at_;                // μ(L_k)
    std::vector<double> mu_left_;              // μ(L_k⁻)
};

struct SchwarzResult {
    Rearrangement f_star_1d;
    RadialFunction f_star;  // f*(V(B_{r_j})) at the nodes
};

/// Throws UnsupportedTail if f(R) ≠ 0 and truncation is not allowed.
SchwarzResult schwarz_rearrangement(const RadialFunction& f, bool allow_truncation = false);

double distribution_function(const RadialFunction& f, double t);

/// Lumped counterpart of the rearrangement: nodal values sorted in decreasing order
/// with their hat weights as volumes, then sampled at the middle of each node's own
/// share of the volume. Commutes exactly with monotone maps of the values.
RadialFunction grid_rearrangement(const RadialFunction& f);

/// Nonincreasing function on f's grid whose ball integrals dominate those of f⋆ at
/// every node, so f ≺ result exactly. Starts from the nodal samples of f⋆ and raises
/// each value only as far as the running ball integral requires; the mass excess is
/// of the order of the interpolation error of f⋆.
RadialFunction dominating_rearrangement(const RadialFunction& f);

/// ∫ F(f⋆(ρ), g⋆(ρ)) dV over B_{R}, integrated in the radius of the rearranged
/// functions with subdivision at every breakpoint of either one.
double integrate_rearranged_pair(const Rearrangement& f, const Rearrangement& g,
                                 const std::function<double(double, double)>& F);

/// ∫ f⋆ g⋆ dV − ∫ f g dV.
double hardy_littlewood_gap(const RadialFunction& f, const RadialFunction& g);
/// ∫ |f⋆ − g⋆| dV.
double l1_distance_rearranged(const RadialFunction& f, const RadialFunction& g);

enum class Verdict { Holds, Fails, Borderline };
std::string_view to_string(Verdict v) noexcept;

struct ConcentrationOptions {
    double tol_report = -1.0;    // negative selects 1e-8·(‖f‖₁ + ‖g‖₁)
    double tol_scale = 1.0;
    bool allow_resample = false;  // grids may differ (same manifold)
    bool cross_check = true;
};

/// Margins of "f ≺ g": ∫_{B_r} g⋆ − ∫_{B_r} f⋆ at the nodes of f's grid.
struct ConcentrationReport {
    std::vector<double> radii;
    std::vector<double> margins;
    double min_margin = 0.0;
    double tol = 0.0;
    Verdict verdict = Verdict::Holds;
    /// ∫|g|^p − ∫|f|^p for p = 1, 2, 4.
    std::vector<double> power_gaps;
    std::string note;
};

ConcentrationReport concentration_compare(const RadialFunction& f, const RadialFunction& g,
                                          const ConcentrationOptions& opts = {});

}  // namespace radflow
