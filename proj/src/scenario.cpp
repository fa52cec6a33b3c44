#include "radflow/scenario.hpp"

#include "radflow/error.hpp"
#include "radflow/expression.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>

namespace radflow {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) config_error(path + " must be an object");
    return j;
}

/// A JSON object whose keys must all belong to a declared set.
class Section {
public:
    Section(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
        : j_(require_object(j, path)), path_(std::move(path)) {
        for (const auto& item : j_.items()) {
            if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
                config_error("unknown key '" + item.key() + "' in " + path_);
            }
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }
    [[nodiscard]] const json& at(const std::string& key) const {
        if (!has(key)) config_error("missing key '" + key + "' in " + path_);
        return j_.at(key);
    }
    [[nodiscard]] std::string child(const std::string& key) const { return path_ + "." + key; }

    [[nodiscard]] double number(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number()) config_error(child(key) + " must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) config_error(child(key) + " must be finite");
        return x;
    }
    [[nodiscard]] double number(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    [[nodiscard]] long long integer(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number_integer()) config_error(child(key) + " must be an integer");
        return v.get<long long>();
    }
    [[nodiscard]] int integer(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const long long x = integer(key);
        if (x < -1000000000LL || x > 1000000000LL) config_error(child(key) + " is out of range");
        return static_cast<int>(x);
    }
    [[nodiscard]] std::string text(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_string()) config_error(child(key) + " must be a string");
        return v.get<std::string>();
    }
    [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_array()) config_error(child(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const json& x : v) {
            if (!x.is_number()) config_error(child(key) + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

std::string kind_of(const json& j, const std::string& path) {
    require_object(j, path);
    if (!j.contains("kind") || !j.at("kind").is_string()) config_error(path + ".kind must be a string");
    return j.at("kind").get<std::string>();
}

ManifoldSpec parse_manifold(const json& j) {
    const std::string path = "manifold";
    const std::string kind = kind_of(j, path);
    ManifoldSpec spec;
    if (kind == "euclidean" || kind == "hyperbolic" || kind == "sphere") {
        Section s(j, path, {"kind", "n"});
        spec.n = s.integer("n", 2);
        spec.kind = kind == "euclidean"    ? ProfileKind::Euclidean
                    : kind == "hyperbolic" ? ProfileKind::Hyperbolic
                                           : ProfileKind::Sphere;
    } else if (kind == "expression") {
        Section s(j, path, {"kind", "n", "psi"});
        spec.n = s.integer("n", 2);
        spec.kind = ProfileKind::Expression;
        spec.expression = s.text("psi");
    } else if (kind == "table") {
        Section s(j, path, {"kind", "n", "r", "psi"});
        spec.n = s.integer("n", 2);
        spec.kind = ProfileKind::Table;
        spec.table_r = s.numbers("r");
        spec.table_psi = s.numbers("psi");
    } else {
        config_error("unknown manifold kind '" + kind + "'");
    }
    return spec;
}

NonlinearitySpec parse_nonlinearity(const json& j) {
    const std::string path = "nonlinearity";
    const std::string kind = kind_of(j, path);
    NonlinearitySpec spec;
    auto read_kreg = [&](const Section& s) {
        if (s.has("k_reg")) spec.k_reg = s.integer("k_reg", 0);
    };
    if (kind == "linear") {
        Section s(j, path, {"kind", "k_reg"});
        read_kreg(s);
    } else if (kind == "porous_medium") {
        Section s(j, path, {"kind", "m", "k_reg"});
        spec.kind = NonlinearityKind::Porous;
        spec.m = s.number("m");
        read_kreg(s);
    } else if (kind == "stefan") {
        Section s(j, path, {"kind", "threshold", "k_reg"});
        spec.kind = NonlinearityKind::Stefan;
        spec.threshold = s.number("threshold", 1.0);
        read_kreg(s);
    } else if (kind == "expression") {
        Section s(j, path, {"kind", "phi", "k_reg"});
        spec.kind = NonlinearityKind::Expression;
        spec.expression = s.text("phi");
        read_kreg(s);
    } else {
        config_error("unknown nonlinearity kind '" + kind + "'");
    }
    return spec;
}

DatumSpec parse_datum(const json& j) {
    const std::string path = "datum";
    const std::string kind = kind_of(j, path);
    DatumSpec spec;
    if (kind == "gaussian") {
        Section s(j, path, {"kind", "amplitude", "sigma"});
        spec.kind = DatumKind::Gaussian;
        spec.amplitude = s.number("amplitude", 1.0);
        spec.sigma = s.number("sigma", 0.5);
    } else if (kind == "annulus_tent") {
        Section s(j, path, {"kind", "a", "b", "height"});
        spec.kind = DatumKind::AnnulusTent;
        spec.a = s.number("a");
        spec.b = s.number("b");
        spec.height = s.number("height", 1.0);
    } else if (kind == "step_table") {
        Section s(j, path, {"kind", "r", "values"});
        spec.kind = DatumKind::StepTable;
        spec.r = s.numbers("r");
        spec.values = s.numbers("values");
    } else if (kind == "expression") {
        Section s(j, path, {"kind", "expr"});
        spec.kind = DatumKind::Expression;
        spec.expression = s.text("expr");
    } else if (kind == "random") {
        Section s(j, path, {"kind", "knots", "support", "seed"});
        spec.kind = DatumKind::Random;
        spec.knots = s.integer("knots", 8);
        spec.support = s.number("support", 2.0);
        if (s.has("seed")) {
            const json& v = s.at("seed");
            if (!v.is_number_unsigned()) config_error("datum.seed must be a nonnegative integer");
            spec.seed = v.get<std::uint64_t>();
        }
    } else {
        config_error("unknown datum kind '" + kind + "'");
    }
    return spec;
}

EllipticSpec parse_elliptic(const json& j) {
    Section s(j, "elliptic", {"beta", "c", "p", "method"});
    EllipticSpec spec;
    const std::string beta = s.has("beta") ? s.text("beta") : "zero";
    if (beta == "zero") {
        spec.beta = BetaKind::Zero;
    } else if (beta == "linear") {
        spec.beta = BetaKind::Linear;
    } else if (beta == "power") {
        spec.beta = BetaKind::Power;
    } else if (beta == "nonlinearity") {
        spec.beta = BetaKind::FromNonlinearity;
    } else {
        config_error("unknown elliptic.beta '" + beta + "'");
    }
    spec.c = s.number("c", 1.0);
    spec.p = s.number("p", 1.0);
    const std::string method = s.has("method") ? s.text("method") : "shooting";
    if (method == "shooting") {
        spec.method = EllipticMethod::Shooting;
    } else if (method == "galerkin") {
        spec.method = EllipticMethod::Galerkin;
    } else {
        config_error("unknown elliptic.method '" + method + "'");
    }
    return spec;
}

PolyaSpec parse_polya(const json& j) {
    Section s(j, "polya", {"r_hat", "nazarov_grid", "r_min", "r_max", "tents"});
    PolyaSpec spec;
    spec.r_hat = s.number("r_hat", spec.r_hat);
    spec.nazarov.grid_size = s.integer("nazarov_grid", spec.nazarov.grid_size);
    spec.nazarov.r_min = s.number("r_min", spec.nazarov.r_min);
    spec.nazarov.r_max = s.number("r_max", spec.nazarov.r_max);
    if (s.has("tents")) {
        Section t(s.at("tents"), "polya.tents",
                  {"a_min", "a_max", "a_count", "width_min", "width_max", "width_count", "cells_per_segment"});
        TentFamily& f = spec.tents;
        f.a_min = t.number("a_min", f.a_min);
        f.a_max = t.number("a_max", f.a_max);
        f.a_count = t.integer("a_count", f.a_count);
        f.width_min = t.number("width_min", f.width_min);
        f.width_max = t.number("width_max", f.width_max);
        f.width_count = t.integer("width_count", f.width_count);
        f.cells_per_segment = t.integer("cells_per_segment", f.cells_per_segment);
    }
    return spec;
}

Tolerances parse_tolerances(const json& j) {
    Section s(j, "tolerances", {"margin", "residual", "flow", "nazarov", "polya", "gap", "monotone", "rearrangement"});
    Tolerances t;
    t.margin = s.number("margin", t.margin);
    t.residual = s.number("residual", t.residual);
    t.flow = s.number("flow", t.flow);
    t.nazarov = s.number("nazarov", t.nazarov);
    t.polya = s.number("polya", t.polya);
    t.gap = s.number("gap", t.gap);
    t.monotone = s.number("monotone", t.monotone);
    t.rearrangement = s.number("rearrangement", t.rearrangement);
    for (double x : {t.margin, t.residual, t.flow, t.nazarov, t.polya, t.gap, t.monotone, t.rearrangement}) {
        if (!(x >= 0.0)) config_error("tolerances must be nonnegative");
    }
    return t;
}

bool needs_datum(ExperimentKind k) {
    return k == ExperimentKind::Rearrange || k == ExperimentKind::Elliptic || k == ExperimentKind::Evolve ||
           k == ExperimentKind::Concentration;
}

double piecewise_linear(const std::vector<double>& x, const std::vector<double>& y, double r) {
    if (r <= x.front()) return y.front();
    if (r >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double t = (r - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - t) * y[i - 1] + t * y[i];
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::ManifoldInfo: return "manifold";
        case ExperimentKind::Rearrange: return "rearrange";
        case ExperimentKind::PolyaCheck: return "polya";
        case ExperimentKind::Falsify: return "falsify";
        case ExperimentKind::Elliptic: return "elliptic";
        case ExperimentKind::Evolve: return "evolve";
        case ExperimentKind::Concentration: return "concentration";
    }
    return "unknown";
}

ExperimentKind experiment_from_string(std::string_view name) {
    for (ExperimentKind k : {ExperimentKind::ManifoldInfo, ExperimentKind::Rearrange, ExperimentKind::PolyaCheck,
                             ExperimentKind::Falsify, ExperimentKind::Elliptic, ExperimentKind::Evolve,
                             ExperimentKind::Concentration}) {
        if (to_string(k) == name) return k;
    }
    config_error("unknown experiment '" + std::string(name) + "'");
}

Scenario parse_scenario(std::string_view json_text, ExperimentKind expected, std::string name) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        config_error("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    Section top(doc, "scenario",
                {"name", "experiment", "manifold", "nonlinearity", "grid", "time", "datum", "elliptic", "polya",
                 "tolerances"});
    Scenario s;
    s.name = top.has("name") ? top.text("name") : std::move(name);
    s.experiment = expected;
    if (top.has("experiment") && experiment_from_string(top.text("experiment")) != expected) {
        config_error("scenario declares experiment '" + top.text("experiment") + "' but '" +
                     std::string(to_string(expected)) + "' was requested");
    }
    s.manifold = parse_manifold(top.at("manifold"));
    if (top.has("nonlinearity")) s.nonlinearity = parse_nonlinearity(top.at("nonlinearity"));
    if (top.has("grid")) {
        Section g(top.at("grid"), "grid", {"R", "M"});
        s.R = g.number("R", s.R);
        s.M = g.integer("M", s.M);
    }
    if (top.has("time")) {
        Section t(top.at("time"), "time", {"h", "T", "output_stride"});
        s.h = t.number("h", s.h);
        s.T = t.number("T", s.T);
        s.output_stride = t.integer("output_stride", s.output_stride);
    }
    if (top.has("datum")) s.datum = parse_datum(top.at("datum"));
    if (!s.datum && needs_datum(expected)) config_error("experiment '" + std::string(to_string(expected)) + "' needs a datum");
    if (top.has("elliptic")) s.elliptic = parse_elliptic(top.at("elliptic"));
    if (top.has("polya")) s.polya = parse_polya(top.at("polya"));
    if (top.has("tolerances")) s.tol = parse_tolerances(top.at("tolerances"));
    s.echo = doc.dump();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, ExperimentKind expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return parse_scenario(buf.str(), expected, path.stem().string());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ConfigError) throw;
        const std::string_view prefix = to_string(ErrorCode::ConfigError);
        fail(ErrorCode::ConfigError, path.string() + ": " + std::string(e.what()).substr(prefix.size() + 2));
    }
}

RadialFunction build_datum(const DatumSpec& spec, const GridPtr& grid, std::uint64_t seed, bool vanish_at_R) {
    const double R = grid->R();
    std::function<double(double)> f;
    switch (spec.kind) {
        case DatumKind::Gaussian: {
            if (!(spec.amplitude >= 0.0) || !(spec.sigma > 0.0)) {
                config_error("gaussian datum needs amplitude ≥ 0 and sigma > 0");
            }
            const double A = spec.amplitude, two_var = 2.0 * spec.sigma * spec.sigma;
            f = [A, two_var](double r) { return A * std::exp(-r * r / two_var); };
            break;
        }
        case DatumKind::AnnulusTent: {
            if (!(spec.a >= 0.0 && spec.b > spec.a) || !(spec.height >= 0.0)) {
                config_error("annulus tent needs 0 ≤ a < b and height ≥ 0");
            }
            const double a = spec.a, b = spec.b, scale = spec.height / (0.5 * (spec.b - spec.a));
            f = [a, b, scale](double r) { return scale * std::max(0.0, std::min(r - a, b - r)); };
            break;
        }
        case DatumKind::StepTable: {
            const auto& x = spec.r;
            const auto& y = spec.values;
            if (x.size() < 2 || x.front() != 0.0) config_error("step table breakpoints must start at 0");
            if (y.size() + 1 != x.size()) config_error("step table needs one value fewer than breakpoints");
            for (std::size_t i = 1; i < x.size(); ++i) {
                if (!(x[i] > x[i - 1])) config_error("step table breakpoints must increase strictly");
            }
            f = [x, y](double r) {
                if (r >= x.back()) return 0.0;
                const auto it = std::upper_bound(x.begin(), x.end(), r);
                return y[static_cast<std::size_t>(it - x.begin()) - 1];
            };
            break;
        }
        case DatumKind::Expression: {
            const expr::Expr e = expr::Expr::parse(spec.expression, "r");
            f = [e](double r) { return e.eval(r); };
            break;
        }
        case DatumKind::Random: {
            if (spec.knots < 2) config_error("random datum needs at least 2 knots");
            if (!(spec.support > 0.0 && spec.support <= R)) config_error("random datum support must lie in (0, R]");
            std::mt19937_64 rng(spec.seed.value_or(seed));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::vector<double> x(spec.knots + 1), y(spec.knots + 1, 0.0);
            for (int i = 0; i <= spec.knots; ++i) x[i] = spec.support * i / spec.knots;
            for (int i = 0; i < spec.knots; ++i) y[i] = unit(rng);
            f = [x, y](double r) { return r >= x.back() ? 0.0 : piecewise_linear(x, y, r); };
            break;
        }
    }
    std::vector<double> vals = RadialFunction::sample(grid, f).values();
    if (vanish_at_R) vals.back() = 0.0;
    for (double v : vals) {
        if (!std::isfinite(v) || v < 0.0) config_error("datum must be finite and nonnegative on [0, R]");
    }
    return RadialFunction(grid, std::move(vals));
}

PreparedScenario prepare(const Scenario& s, const GlobalOptions& global) {
    if (!(global.tol_scale > 0.0) || !std::isfinite(global.tol_scale)) {
        config_error("tolerance multiplier must be positive");
    }
    PreparedScenario p;
    p.spec = s;
    p.tol_scale = global.tol_scale;
    p.manifold = ModelManifold::make(s.manifold);

    const NonlinearitySpec& ns = s.nonlinearity;
    switch (ns.kind) {
        case NonlinearityKind::Linear: p.phi = Nonlinearity::linear(); break;
        case NonlinearityKind::Porous: p.phi = Nonlinearity::porous_medium(ns.m); break;
        case NonlinearityKind::Stefan: p.phi = Nonlinearity::stefan(ns.threshold); break;
        case NonlinearityKind::Expression: p.phi = Nonlinearity::from_expression(ns.expression); break;
    }
    if (ns.k_reg) {
        if (*ns.k_reg < 1) config_error("nonlinearity.k_reg must be at least 1");
        (void)p.phi.regularize(*ns.k_reg);
    }

    if (!(s.R > 0.0) || !(s.R < p.manifold.domain_end())) config_error("grid.R must lie in (0, end of the manifold)");
    if (s.M < 16) config_error("grid.M must be at least 16");
    p.grid = RadialGrid::uniform(p.manifold, s.R, s.M);

    if (!(s.h > 0.0)) config_error("time.h must be positive");
    if (!(s.T >= 0.0)) config_error("time.T must be nonnegative");
    const double steps = s.T / s.h;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
        config_error("time.T must be a whole number of steps h");
    }
    if (s.output_stride < 1) config_error("time.output_stride must be positive");

    if (s.datum) {
        p.datum = build_datum(*s.datum, p.grid, global.seed, s.experiment != ExperimentKind::Elliptic);
    }

    const EllipticSpec& es = s.elliptic;
    switch (es.beta) {
        case BetaKind::Zero: p.beta = Beta::zero(); break;
        case BetaKind::Linear: p.beta = Beta::linear(es.c); break;
        case BetaKind::Power: p.beta = Beta::power(es.c, es.p); break;
        case BetaKind::FromNonlinearity: p.beta = Beta::from_nonlinearity(p.phi, s.h); break;
    }

    if (s.experiment != ExperimentKind::PolyaCheck && s.experiment != ExperimentKind::Falsify) return p;
    const PolyaSpec& ps = s.polya;
    if (!(ps.r_hat > 0.0 && ps.r_hat < p.manifold.domain_end())) {
        config_error("polya.r_hat must lie inside the manifold");
    }
    if (ps.nazarov.grid_size < 32) config_error("polya.nazarov_grid must be at least 32");
    if (!(ps.nazarov.r_min > 0.0 && ps.nazarov.r_max > ps.nazarov.r_min)) {
        config_error("polya needs 0 < r_min < r_max");
    }
    const TentFamily& tf = ps.tents;
    if (!(tf.a_min >= 0.0 && tf.a_max >= tf.a_min && tf.a_count >= 1 && tf.width_min > 0.0 &&
          tf.width_max >= tf.width_min && tf.width_count >= 1 && tf.cells_per_segment >= 2)) {
        config_error("polya.tents describes an empty or invalid family");
    }
    if (p.manifold.compact() && !(tf.a_max + tf.width_max < p.manifold.domain_end())) {
        config_error("polya.tents reaches past the end of the manifold");
    }
    return p;
}

}  // namespace radflow
