#pragma once

#include "radflow/elliptic.hpp"
#include "radflow/manifold.hpp"
#include "radflow/nonlinearity.hpp"
#include "radflow/polya.hpp"
#include "radflow/radial.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radflow {

enum class ExperimentKind { ManifoldInfo, Rearrange, PolyaCheck, Falsify, Elliptic, Evolve, Concentration };

/// Short name used in file names and configs: manifold, rearrange, polya, falsify, elliptic,
/// evolve, concentration.
std::string_view to_string(ExperimentKind kind) noexcept;
/// Throws ConfigError for an unknown name.
ExperimentKind experiment_from_string(std::string_view name);

struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::Linear;
    double m = 1.0;          // porous medium exponent
    double threshold = 1.0;  // Stefan threshold
    std::string expression;  // in the variable u
    std::optional<int> k_reg;
};

enum class DatumKind { Gaussian, AnnulusTent, StepTable, Expression, Random };

struct DatumSpec {
    DatumKind kind = DatumKind::Gaussian;
    double amplitude = 1.0;  // gaussian: amplitude·exp(−r²/(2σ²))
    double sigma = 0.5;
    double a = 1.0;          // annulus tent: height·min(r − a, b − r)⁺ / ((b − a)/2)
    double b = 2.0;
    double height = 1.0;
    std::vector<double> r;       // step table: breakpoints, r[0] = 0
    std::vector<double> values;  // value on [r[i], r[i+1]); zero beyond the last breakpoint
    std::string expression;      // in the variable r
    int knots = 8;               // random: uniform values at equispaced knots on [0, support)
    double support = 2.0;
    std::optional<std::uint64_t> seed;
};

enum class BetaKind { Zero, Linear, Power, FromNonlinearity };

struct EllipticSpec {
    BetaKind beta = BetaKind::Zero;
    double c = 1.0;
    double p = 1.0;
    EllipticMethod method = EllipticMethod::Shooting;
};

struct PolyaSpec {
    double r_hat = 1.0;
    NazarovOptions nazarov;
    TentFamily tents;
};

/// Absolute thresholds before the global tolerance multiplier is applied.
struct Tolerances {
    double margin = 1e-7;     // concentration margins
    double residual = 1e-8;   // elliptic identity residual, relative to 1 + ∫|f|
    double flow = 1e-7;       // discrete flow laws, relative to their natural scale
    double nazarov = 1e-12;   // relative subadditivity slack
    double polya = 1e-6;      // energy ratio excess of a tent witness
    double gap = 1e-12;       // curvature gap
    double monotone = 1e-12;  // nodewise increase of ū, relative to its maximum
    double rearrangement = 1e-8;  // relative mismatch of ∫(f⋆)ᵖ and ∫fᵖ
};

struct Scenario {
    std::string name;
    ExperimentKind experiment = ExperimentKind::ManifoldInfo;
    ManifoldSpec manifold;
    NonlinearitySpec nonlinearity;
    double R = 4.0;
    int M = 400;
    double h = 1e-3;
    double T = 0.1;
    int output_stride = 1;
    std::optional<DatumSpec> datum;
    EllipticSpec elliptic;
    PolyaSpec polya;
    Tolerances tol;
    std::string echo;  // the configuration document, re-serialized
};

/// Parses one JSON document. Unknown keys and ill-typed values raise ConfigError. A present
/// "experiment" field must name the expected kind.
Scenario parse_scenario(std::string_view json_text, ExperimentKind expected, std::string name = "scenario");
/// Reads a file (IoError if unreadable) and names the scenario after its stem.
Scenario load_scenario(const std::filesystem::path& path, ExperimentKind expected);

struct GlobalOptions {
    std::uint64_t seed = 1;
    double tol_scale = 1.0;
};

/// A scenario whose every object has been constructed: any constructor error surfaces here.
struct PreparedScenario {
    Scenario spec;
    ModelManifold manifold = ModelManifold::euclidean(2);
    Nonlinearity phi = Nonlinearity::linear();
    GridPtr grid;
    std::optional<RadialFunction> datum;
    Beta beta = Beta::zero();
    double tol_scale = 1.0;
};

PreparedScenario prepare(const Scenario& s, const GlobalOptions& global = {});

/// Nonnegative datum sampled at the grid nodes; with vanish_at_R its value at R is set to zero.
RadialFunction build_datum(const DatumSpec& spec, const GridPtr& grid, std::uint64_t seed, bool vanish_at_R = true);

}  // namespace radflow
