#include "radflow/error.hpp"
#include "radflow/experiments.hpp"
#include "radflow/output.hpp"
#include "radflow/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace radflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("radflow_lab_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

PreparedScenario prepared(const std::string& json, ExperimentKind kind) {
    return prepare(parse_scenario(json, kind));
}

const char* kHeatAnnulus = R"j({
  "manifold": {"kind": "euclidean", "n": 2},
  "grid": {"R": 6, "M": 400},
  "time": {"h": 0.005, "T": 0.25, "output_stride": 10},
  "datum": {"kind": "step_table", "r": [0, 1, 2], "values": [0, 1]}
})j";

}  // namespace

TEST(Scenario, ParsesEveryField) {
    const Scenario s = parse_scenario(R"j({
      "name": "full",
      "experiment": "evolve",
      "manifold": {"kind": "expression", "n": 3, "psi": "sinh(r)"},
      "nonlinearity": {"kind": "porous_medium", "m": 2.5, "k_reg": 32},
      "grid": {"R": 3, "M": 120},
      "time": {"h": 0.01, "T": 0.5, "output_stride": 5},
      "datum": {"kind": "annulus_tent", "a": 0.5, "b": 1.5, "height": 2},
      "elliptic": {"beta": "power", "c": 2, "p": 3, "method": "galerkin"},
      "polya": {"r_hat": 0.5, "nazarov_grid": 64, "r_min": 0.01, "r_max": 4,
                "tents": {"a_min": 0, "a_max": 1, "a_count": 4, "width_min": 0.2, "width_max": 1,
                          "width_count": 3, "cells_per_segment": 6}},
      "tolerances": {"margin": 1e-6, "flow": 1e-6}
    })j",
                                      ExperimentKind::Evolve);
    EXPECT_EQ(s.name, "full");
    EXPECT_EQ(s.manifold.kind, ProfileKind::Expression);
    EXPECT_EQ(s.manifold.n, 3);
    EXPECT_EQ(s.nonlinearity.kind, NonlinearityKind::Porous);
    EXPECT_DOUBLE_EQ(s.nonlinearity.m, 2.5);
    EXPECT_EQ(s.nonlinearity.k_reg.value(), 32);
    EXPECT_DOUBLE_EQ(s.R, 3.0);
    EXPECT_EQ(s.M, 120);
    EXPECT_EQ(s.output_stride, 5);
    ASSERT_TRUE(s.datum.has_value());
    EXPECT_EQ(s.datum->kind, DatumKind::AnnulusTent);
    EXPECT_EQ(s.elliptic.beta, BetaKind::Power);
    EXPECT_EQ(s.elliptic.method, EllipticMethod::Galerkin);
    EXPECT_EQ(s.polya.nazarov.grid_size, 64);
    EXPECT_EQ(s.polya.tents.cells_per_segment, 6);
    EXPECT_DOUBLE_EQ(s.tol.margin, 1e-6);
    EXPECT_DOUBLE_EQ(s.tol.residual, 1e-8);
}

TEST(Scenario, DefaultsGridSize) {
    const Scenario s = parse_scenario(R"j({"manifold": {"kind": "euclidean"}})j", ExperimentKind::ManifoldInfo);
    EXPECT_EQ(s.M, 400);
    EXPECT_EQ(s.manifold.n, 2);
}

TEST(Scenario, UnknownKeysAreErrors) {
    for (const char* doc : {
             R"j({"manifold": {"kind": "euclidean"}, "extra": 1})j",
             R"j({"manifold": {"kind": "euclidean", "psi": "r"}})j",
             R"j({"manifold": {"kind": "euclidean"}, "grid": {"R": 1, "N": 10}})j",
             R"j({"manifold": {"kind": "euclidean"}, "tolerances": {"margins": 1e-3}})j",
             R"j({"manifold": {"kind": "euclidean"}, "polya": {"tents": {"a_mid": 1}}})j",
         }) {
        EXPECT_EQ(code_of([&] { parse_scenario(doc, ExperimentKind::ManifoldInfo); }), ErrorCode::ConfigError)
            << doc;
    }
}

TEST(Scenario, IllTypedAndMissingFields) {
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"manifold": {"kind": "euclidean", "n": "two"}})j",
                                          ExperimentKind::ManifoldInfo); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"manifold": {"kind": "euclidean", "n": 2.5}})j",
                                          ExperimentKind::ManifoldInfo); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"grid": {"R": 1}})j", ExperimentKind::ManifoldInfo); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"manifold": {"kind": "euclidean"}})j", ExperimentKind::Evolve); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"manifold": {"kind": "torus"}})j", ExperimentKind::ManifoldInfo); }),
              ErrorCode::ConfigError);
}

TEST(Scenario, ExperimentMustMatchCommand) {
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"experiment": "evolve", "manifold": {"kind": "euclidean"}})j",
                                          ExperimentKind::ManifoldInfo); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_scenario(R"j({"experiment": "nonsense", "manifold": {"kind": "euclidean"}})j",
                                          ExperimentKind::ManifoldInfo); }),
              ErrorCode::ConfigError);
}

TEST(Scenario, MalformedJsonNamesTheByte) {
    try {
        parse_scenario("{\"manifold\": ", ExperimentKind::ManifoldInfo);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
}

TEST(Scenario, ExperimentNamesRoundTrip) {
    for (ExperimentKind k : {ExperimentKind::ManifoldInfo, ExperimentKind::Rearrange, ExperimentKind::PolyaCheck,
                             ExperimentKind::Falsify, ExperimentKind::Elliptic, ExperimentKind::Evolve,
                             ExperimentKind::Concentration}) {
        EXPECT_EQ(experiment_from_string(to_string(k)), k);
    }
}

TEST(Scenario, ValidationHappensBeforeCompute) {
    const auto bad = [](const std::string& doc, ExperimentKind kind) {
        return code_of([&] { prepared(doc, kind); });
    };
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "euclidean"}, "datum": {"kind": "expression", "expr": "r - 1"}})j",
                  ExperimentKind::Evolve),
              ErrorCode::ConfigError);
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "euclidean"}, "datum": {"kind": "expression", "expr": "sin("}})j",
                  ExperimentKind::Evolve),
              ErrorCode::ParseError);
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "euclidean"}, "time": {"h": 0.003, "T": 0.01},
                     "datum": {"kind": "gaussian"}})j",
                  ExperimentKind::Evolve),
              ErrorCode::ConfigError);
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "sphere"}, "grid": {"R": 4}})j", ExperimentKind::ManifoldInfo),
              ErrorCode::ConfigError);
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "euclidean"}, "nonlinearity": {"kind": "porous_medium", "m": 0.5}})j",
                  ExperimentKind::ManifoldInfo),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "expression", "psi": "r^2"}})j", ExperimentKind::ManifoldInfo),
              ErrorCode::InvalidProfile);
    EXPECT_EQ(bad(R"j({"manifold": {"kind": "euclidean"}, "datum": {"kind": "step_table", "r": [0, 2, 1],
                     "values": [1, 0]}})j",
                  ExperimentKind::Rearrange),
              ErrorCode::ConfigError);
}

TEST(Datum, BuildersMatchTheirFormulas) {
    const GridPtr grid = RadialGrid::uniform(ModelManifold::euclidean(2), 4.0, 400);
    DatumSpec g;
    g.amplitude = 2.0;
    g.sigma = 0.5;
    const RadialFunction fg = build_datum(g, grid, 1);
    EXPECT_DOUBLE_EQ(fg[0], 2.0);
    EXPECT_NEAR(fg.at(0.5), 2.0 * std::exp(-0.5), 1e-12);
    EXPECT_EQ(fg[400], 0.0);

    DatumSpec tent;
    tent.kind = DatumKind::AnnulusTent;
    tent.a = 1.0;
    tent.b = 2.0;
    tent.height = 3.0;
    const RadialFunction ft = build_datum(tent, grid, 1);
    EXPECT_NEAR(ft.at(1.5), 3.0, 1e-12);
    EXPECT_EQ(ft.at(0.5), 0.0);

    DatumSpec steps;
    steps.kind = DatumKind::StepTable;
    steps.r = {0.0, 1.0, 2.0};
    steps.values = {2.0, 1.0};
    const RadialFunction fs = build_datum(steps, grid, 1);
    EXPECT_EQ(fs.at(0.5), 2.0);
    EXPECT_EQ(fs.at(1.5), 1.0);
    EXPECT_EQ(fs.at(2.5), 0.0);
}

TEST(Datum, RandomProfilesFollowTheSeed) {
    const GridPtr grid = RadialGrid::uniform(ModelManifold::hyperbolic(2), 3.0, 300);
    DatumSpec spec;
    spec.kind = DatumKind::Random;
    spec.support = 2.0;
    const RadialFunction a = build_datum(spec, grid, 7);
    const RadialFunction b = build_datum(spec, grid, 7);
    const RadialFunction c = build_datum(spec, grid, 8);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(a.values(), c.values());
    EXPECT_EQ(a.at(2.5), 0.0);
    spec.seed = 7;
    EXPECT_EQ(build_datum(spec, grid, 99).values(), a.values());
}

TEST(Output, SeventeenSignificantDigits) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(3.0), "3");
    EXPECT_EQ(format_number(-1.5e-300), "-1.5000000000000001e-300");
}

TEST(Output, EmptyResultWritesManifestOnly) {
    const fs::path dir = fresh_dir("empty");
    RunOutput run;
    run.experiment = "evolve";
    const FileManifest m = emit_outputs(run, dir, R"j({"a": 1})j");
    ASSERT_EQ(m.files.size(), 1u);
    EXPECT_EQ(m.files[0], "manifest.json");
    int count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++count;
    EXPECT_EQ(count, 1);
    const std::string manifest = slurp(dir / "manifest.json");
    EXPECT_NE(manifest.find("\"version\""), std::string::npos);
    EXPECT_NE(manifest.find("\"wall_time_seconds\""), std::string::npos);
    EXPECT_NE(manifest.find("\"scenario\""), std::string::npos);
}

TEST(Output, WriteFailureRaisesIoError) {
    const fs::path blocker = fresh_dir("blocker");
    std::ofstream(blocker) << "file";
    RunOutput run;
    run.tables.push_back({"x.csv", {"r", "value"}, {{0.0, 1.0}}});
    EXPECT_EQ(code_of([&] { emit_outputs(run, blocker / "sub", "{}"); }), ErrorCode::IoError);
    EXPECT_EQ(code_of([&] { write_csv(run.tables[0], blocker / "sub" / "x.csv"); }), ErrorCode::IoError);
    fs::remove(blocker);
}

TEST(Output, CsvLayout) {
    const fs::path dir = fresh_dir("layout");
    fs::create_directories(dir);
    const GridPtr grid = RadialGrid::uniform(ModelManifold::euclidean(2), 1.0, 16);
    write_csv(radial_function_table("f.csv", RadialFunction::sample(grid, [](double r) { return 1.0 - r; })),
              dir / "f.csv");
    const std::string body = slurp(dir / "f.csv");
    EXPECT_EQ(body.rfind("r,value\n0,1\n0.0625,0.9375\n", 0), 0u);
    EXPECT_EQ(body.find('\r'), std::string::npos);
}

TEST(Experiments, ConcentrationFileCountContract) {
    const PreparedScenario s = prepared(R"j({
      "manifold": {"kind": "euclidean", "n": 2},
      "grid": {"R": 4, "M": 200},
      "time": {"h": 0.01, "T": 0.08, "output_stride": 2},
      "datum": {"kind": "annulus_tent", "a": 1, "b": 2}
    })j",
                                       ExperimentKind::Concentration);
    const RunOutput run = run_scenario(s);
    const FileManifest m = emit_outputs(run, fresh_dir("conc_count"), s.spec.echo);
    const std::vector<std::string> expected = {"concentration_0.csv", "concentration_1.csv", "concentration_2.csv",
                                               "concentration_3.csv", "concentration_4.csv",
                                               "concentration_diagnostics.csv", "manifest.json"};
    EXPECT_EQ(m.files, expected);
    EXPECT_TRUE(run.holds);
}

TEST(Experiments, FalsificationFileContract) {
    const PreparedScenario s = prepared(R"j({"manifold": {"kind": "euclidean", "n": 2}})j", ExperimentKind::Falsify);
    const RunOutput run = run_scenario(s);
    const FileManifest m = emit_outputs(run, fresh_dir("falsify_count"), s.spec.echo);
    const std::vector<std::string> expected = {"falsify_nazarov.csv", "falsify_witness.csv", "falsify_gap.csv",
                                               "manifest.json"};
    EXPECT_EQ(m.files, expected);
    EXPECT_TRUE(run.holds);
}

TEST(Experiments, IdenticalScenariosGiveIdenticalCsv) {
    const PreparedScenario s = prepared(kHeatAnnulus, ExperimentKind::Concentration);
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    const FileManifest ma = emit_outputs(run_scenario(s), a, s.spec.echo);
    emit_outputs(run_scenario(prepared(kHeatAnnulus, ExperimentKind::Concentration)), b, s.spec.echo);
    for (const std::string& f : ma.files) {
        if (f == "manifest.json") continue;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(Experiments, RearrangedDatumFlowsIdentically) {
    const PreparedScenario s = prepared(R"j({
      "manifold": {"kind": "hyperbolic", "n": 2},
      "grid": {"R": 4, "M": 300},
      "time": {"h": 0.01, "T": 0.2, "output_stride": 5},
      "datum": {"kind": "gaussian", "sigma": 0.6}
    })j",
                                       ExperimentKind::Concentration);
    const ConcentrationSeries c = run_concentration_experiment(s);
    for (std::size_t k = 0; k < c.reports.size(); ++k) {
        for (std::size_t j = 0; j < c.u.states[k].size(); ++j) {
            EXPECT_NEAR(c.u.states[k][j], c.u_bar.states[k][j], 1e-12);
        }
        for (double m : c.reports[k].margins) EXPECT_NEAR(m, 0.0, 1e-12);
    }
}

TEST(Experiments, HeatAnnulusOnThePlane) {
    const ConcentrationSeries c = run_concentration_experiment(prepared(kHeatAnnulus, ExperimentKind::Concentration));
    EXPECT_TRUE(c.holds);
    EXPECT_GE(c.min_margin, -1e-7);
    EXPECT_EQ(c.times.size(), 6u);
    EXPECT_DOUBLE_EQ(c.times.back(), 0.25);
    EXPECT_TRUE(c.laws_u.holds);
    EXPECT_TRUE(c.laws_u_bar.holds);
}

TEST(Experiments, PorousMediumTentOnHyperbolicPlane) {
    const ConcentrationSeries c = run_concentration_experiment(prepared(R"j({
      "manifold": {"kind": "hyperbolic", "n": 2},
      "nonlinearity": {"kind": "porous_medium", "m": 2},
      "grid": {"R": 5, "M": 400},
      "time": {"h": 0.005, "T": 0.25, "output_stride": 10},
      "datum": {"kind": "annulus_tent", "a": 1, "b": 2}
    })j",
                                                                       ExperimentKind::Concentration));
    EXPECT_TRUE(c.holds);
    EXPECT_GE(c.min_margin, -1e-7);
    EXPECT_LE(c.u_bar_max_increase, 1e-12);
}

TEST(Experiments, FalsificationOnThePlane) {
    const FalsificationResult f =
        run_falsification_experiment(prepared(R"j({"manifold": {"kind": "euclidean", "n": 2}})j", ExperimentKind::Falsify));
    EXPECT_TRUE(f.nazarov.pass);
    EXPECT_FALSE(f.violation.witness.has_value());
    EXPECT_NEAR(f.gap.gap, 0.0, 1e-12);
    EXPECT_FALSE(f.flow.has_value());
    EXPECT_TRUE(f.holds);
}

TEST(Experiments, FalsificationWithShrinkingProfile) {
    const FalsificationResult f = run_falsification_experiment(prepared(R"j({
      "manifold": {"kind": "expression", "n": 2, "psi": "r*exp(-r^2)"},
      "grid": {"R": 2, "M": 200},
      "time": {"h": 0.001, "T": 0.01, "output_stride": 5}
    })j",
                                                                        ExperimentKind::Falsify));
    EXPECT_FALSE(f.nazarov.pass);
    ASSERT_TRUE(f.violation.witness.has_value());
    EXPECT_GT(f.violation.best.ratio, 1.0);
    ASSERT_TRUE(f.flow.has_value());
    EXPECT_EQ(f.flow->times.size(), 3u);
    EXPECT_FALSE(f.holds);
}

TEST(Experiments, FalsificationSeparatesFullAndRadialInequalities) {
    const FalsificationResult f = run_falsification_experiment(prepared(R"j({
      "manifold": {"kind": "expression", "n": 2, "psi": "r + r^3"},
      "polya": {"r_hat": 1}
    })j",
                                                                        ExperimentKind::Falsify));
    EXPECT_TRUE(f.nazarov.pass);
    EXPECT_FALSE(f.violation.witness.has_value());
    EXPECT_NEAR(f.gap.gap, 0.125, 1e-9);
    EXPECT_FALSE(f.holds);
}

TEST(Experiments, EllipticManufacturedSolution) {
    const PreparedScenario s = prepared(R"j({
      "manifold": {"kind": "euclidean", "n": 3},
      "grid": {"R": 1, "M": 400},
      "datum": {"kind": "expression", "expr": "1"}
    })j",
                                       ExperimentKind::Elliptic);
    const RunOutput run = run_scenario(s);
    EXPECT_TRUE(run.holds);
    ASSERT_EQ(run.tables.size(), 1u);
    const CsvTable& t = run.tables[0];
    EXPECT_EQ(t.columns, (std::vector<std::string>{"r", "v", "residual"}));
    for (const auto& row : t.rows) EXPECT_NEAR(row[1], (1.0 - row[0] * row[0]) / 6.0, 1e-6);
}

TEST(Experiments, EvolveTablesFollowTheTrajectorySchema) {
    const PreparedScenario s = prepared(R"j({
      "manifold": {"kind": "euclidean", "n": 2},
      "grid": {"R": 3, "M": 100},
      "time": {"h": 0.01, "T": 0.1, "output_stride": 5},
      "datum": {"kind": "gaussian"}
    })j",
                                       ExperimentKind::Evolve);
    const RunOutput run = run_scenario(s);
    EXPECT_TRUE(run.holds);
    ASSERT_EQ(run.tables.size(), 4u);
    EXPECT_EQ(run.tables[0].file, "evolve_0.csv");
    EXPECT_EQ(run.tables[0].columns, (std::vector<std::string>{"r", "u"}));
    EXPECT_EQ(run.tables[3].file, "evolve_diagnostics.csv");
    EXPECT_EQ(run.tables[3].columns,
              (std::vector<std::string>{"step", "L1", "L2", "Linf", "dirichlet_energy_phi_u", "Phi_integral",
                                        "hminus1_rate"}));
    EXPECT_EQ(run.tables[3].rows.size(), 11u);
}

TEST(Experiments, RearrangePreservesIntegrals) {
    const RunOutput run = run_scenario(prepared(R"j({
      "manifold": {"kind": "sphere", "n": 3},
      "grid": {"R": 2.5, "M": 250},
      "datum": {"kind": "random", "knots": 10, "support": 2}
    })j",
                                                ExperimentKind::Rearrange));
    EXPECT_TRUE(run.holds) << (run.failures.empty() ? "" : run.failures[0]);
    EXPECT_EQ(run.tables.size(), 3u);
}
