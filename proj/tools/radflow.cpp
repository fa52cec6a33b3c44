#include "radflow/error.hpp"
#include "radflow/experiments.hpp"
#include "radflow/output.hpp"
#include "radflow/parallel.hpp"
#include "radflow/scenario.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace radflow;

namespace {

constexpr int kExitHolds = 0;
constexpr int kExitRuntimeError = 1;
constexpr int kExitVerdictFailed = 2;

struct Command {
    ExperimentKind kind;
    CLI::App* app = nullptr;
    std::vector<std::string> configs;
    std::string out;
};

struct Outcome {
    std::optional<RunOutput> run;
    std::string error;
};

void add_command(CLI::App& parent, const std::string& name, const std::string& help, ExperimentKind kind,
                 std::vector<Command>& commands) {
    commands.push_back({kind, parent.add_subcommand(name, help), {}, {}});
    Command& c = commands.back();
    c.app->add_option("--config", c.configs, "Scenario JSON file (repeatable)")->required()->check(CLI::ExistingFile);
    c.app->add_option("--out", c.out, "Output directory")->required();
}

int run(const Command& cmd, const GlobalOptions& global, int jobs) {
    std::vector<PreparedScenario> scenarios;
    scenarios.reserve(cmd.configs.size());
    std::set<std::string> names;
    for (const std::string& path : cmd.configs) {
        scenarios.push_back(prepare(load_scenario(path, cmd.kind), global));
        if (!names.insert(scenarios.back().spec.name).second) {
            fail(ErrorCode::ConfigError, "two scenarios are named '" + scenarios.back().spec.name + "'");
        }
    }

    const fs::path root(cmd.out);
    const int count = static_cast<int>(scenarios.size());
    std::vector<Outcome> outcomes(count);
    auto execute = [&](int i) {
        const PreparedScenario& s = scenarios[i];
        try {
            RunOutput out = run_scenario(s);
            emit_outputs(out, count == 1 ? root : root / s.spec.name, s.spec.echo);
            outcomes[i].run = std::move(out);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    };
    if (jobs > 1 && count > 1) {
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
        for (int i = 0; i < count; ++i) execute(i);
    } else {
        for (int i = 0; i < count; ++i) execute(i);
    }

    int code = kExitHolds;
    for (int i = 0; i < count; ++i) {
        const std::string& name = scenarios[i].spec.name;
        if (!outcomes[i].run) {
            std::cerr << name << ": error: " << outcomes[i].error << '\n';
            code = kExitRuntimeError;
            continue;
        }
        const RunOutput& out = *outcomes[i].run;
        char seconds[32];
        std::snprintf(seconds, sizeof seconds, "%.3f", out.wall_seconds);
        std::cout << name << ": " << out.experiment << ' ' << (out.holds ? "holds" : "fails") << " (" << seconds
                  << " s)\n";
        for (const std::string& f : out.failures) std::cout << "  " << f << '\n';
        if (!out.holds && code == kExitHolds) code = kExitVerdictFailed;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial filtration flows and concentration comparison on model manifolds"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(tool_version()));

    int jobs = 1;
    std::uint64_t seed = 1;
    double tol_scale = 1.0;
    app.add_option("--jobs", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for random data");
    app.add_option("--tol-scale", tol_scale, "Multiplier applied to every tolerance")->check(CLI::PositiveNumber);

    std::vector<Command> commands;
    commands.reserve(7);
    CLI::App* manifold = app.add_subcommand("manifold", "Model manifold queries");
    manifold->require_subcommand(1);
    add_command(*manifold, "info", "Profile, volumes and curvatures", ExperimentKind::ManifoldInfo, commands);
    add_command(app, "rearrange", "Schwarz rearrangement of a datum", ExperimentKind::Rearrange, commands);
    CLI::App* polya = app.add_subcommand("polya", "Pólya–Szegő checks");
    polya->require_subcommand(1);
    add_command(*polya, "check", "Nazarov scan and tent search", ExperimentKind::PolyaCheck, commands);
    add_command(*polya, "falsify", "Nazarov scan, tent search, curvature gap and witness flow",
                ExperimentKind::Falsify, commands);
    CLI::App* elliptic = app.add_subcommand("elliptic", "Semilinear elliptic problems");
    elliptic->require_subcommand(1);
    add_command(*elliptic, "solve", "Solve −Δv + β(v) = f on a ball", ExperimentKind::Elliptic, commands);
    add_command(app, "evolve", "Implicit Euler filtration flow", ExperimentKind::Evolve, commands);
    add_command(app, "concentration", "Concentration comparison along two flows", ExperimentKind::Concentration,
                commands);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitRuntimeError;
    }

    set_thread_count(jobs);
    const GlobalOptions global{seed, tol_scale};
    for (const Command& c : commands) {
        if (!c.app->parsed()) continue;
        try {
            return run(c, global, jobs);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitRuntimeError;
        }
    }
    return kExitRuntimeError;
}
