#pragma once

#include "radflow/elliptic.hpp"
#include "radflow/radial.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace radflow {

std::string_view tool_version() noexcept;

/// Shortest round-trip rendering with 17 significant digits.
std::string format_number(double x);

struct CsvTable {
    std::string file;  // name inside the output directory
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Columns r,value.
CsvTable radial_function_table(std::string file, const RadialFunction& f);
/// Columns r,v,residual.
CsvTable elliptic_solution_table(std::string file, const EllipticSolution& s);

/// Writes a table with Unix newlines; IoError on failure.
void write_csv(const CsvTable& table, const std::filesystem::path& path);

using SummaryValue = std::variant<double, long long, bool, std::string>;

/// Everything one experiment produces.
struct RunOutput {
    std::string experiment;
    std::vector<CsvTable> tables;
    std::vector<std::pair<std::string, SummaryValue>> summary;
    bool holds = true;
    std::vector<std::string> failures;  // one line per verdict that failed
    double wall_seconds = 0.0;

    void note(std::string key, SummaryValue value) { summary.emplace_back(std::move(key), std::move(value)); }
    void require(bool ok, const std::string& what) {
        if (!ok) {
            holds = false;
            failures.push_back(what);
        }
    }
};

struct FileManifest {
    std::filesystem::path directory;
    std::vector<std::string> files;  // CSV files followed by manifest.json
};

/// Writes every table and manifest.json (scenario echo, tool version, wall time, verdicts,
/// summary, file list) into out_dir, creating it if needed. IoError on any failure.
FileManifest emit_outputs(const RunOutput& run, const std::filesystem::path& out_dir,
                          std::string_view scenario_echo = "{}");

}  // namespace radflow
