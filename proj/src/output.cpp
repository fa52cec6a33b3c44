#include "radflow/output.hpp"

#include "radflow/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace radflow {

std::string_view tool_version() noexcept { return "0.1.0"; }

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable radial_function_table(std::string file, const RadialFunction& f) {
    CsvTable t{std::move(file), {"r", "value"}, {}};
    const auto& r = f.grid().nodes();
    for (std::size_t j = 0; j < f.size(); ++j) t.rows.push_back({r[j], f[j]});
    return t;
}

CsvTable elliptic_solution_table(std::string file, const EllipticSolution& s) {
    CsvTable t{std::move(file), {"r", "v", "residual"}, {}};
    const auto& r = s.v.grid().nodes();
    for (std::size_t j = 0; j < s.v.size(); ++j) {
        t.rows.push_back({r[j], s.v[j], j < s.residuals.size() ? s.residuals[j] : 0.0});
    }
    return t;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) {
            fail(ErrorCode::IoError, "row width does not match the header of " + table.file);
        }
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

nlohmann::json to_json(const SummaryValue& v) {
    return std::visit(
        [](const auto& x) -> nlohmann::json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(x)) return format_number(x);
            }
            return x;
        },
        v);
}

}  // namespace

FileManifest emit_outputs(const RunOutput& run, const std::filesystem::path& out_dir, std::string_view scenario_echo) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        fail(ErrorCode::IoError, "cannot create output directory " + out_dir.string());
    }
    FileManifest manifest{out_dir, {}};
    for (const CsvTable& t : run.tables) {
        write_csv(t, out_dir / t.file);
        manifest.files.push_back(t.file);
    }
    manifest.files.emplace_back("manifest.json");

    nlohmann::json doc;
    doc["tool"] = "radflow";
    doc["version"] = std::string(tool_version());
    doc["experiment"] = run.experiment;
    try {
        doc["scenario"] = nlohmann::json::parse(scenario_echo.begin(), scenario_echo.end());
    } catch (const nlohmann::json::parse_error&) {
        doc["scenario"] = std::string(scenario_echo);
    }
    doc["wall_time_seconds"] = run.wall_seconds;
    doc["verdict"] = run.holds ? "holds" : "fails";
    doc["failures"] = run.failures;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [key, value] : run.summary) summary[key] = to_json(value);
    doc["summary"] = summary;
    doc["files"] = manifest.files;

    const auto path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
    return manifest;
}

}  // namespace radflow
