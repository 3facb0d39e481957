#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gplab/config.hpp"

namespace gplab {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string requirement;  // e.g. "<= 1e-06"
};

struct ExperimentReport {
    std::string experiment;
    int schema_version = 1;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;
    std::vector<std::string> notices;
    double wall_clock_seconds = 0.0;

    void add_row(std::vector<Cell> row);
    void check(std::string name, bool pass, double value, std::string requirement);
    bool pass() const;
    const Check* find_check(const std::string& name) const;
};

std::string build_id();

// Shortest round-trip decimal form; non-finite values print as nan/inf/-inf.
std::string format_cell(const Cell& c);

// schema_version first, then the report columns.
std::string report_csv(const ExperimentReport& r);
// Config echo, build id, thread count, summary and checks. Wall-clock is left
// out so equal inputs give byte-identical files; it goes to the timing sidecar.
nlohmann::json report_json(const ExperimentReport& r, const ExperimentConfig& config);

struct ReportFiles {
    std::filesystem::path csv, json, timing;
};

// <outdir>/<experiment>-<timestamp>.{csv,json} plus .timing.json.
ReportFiles write_report(const ExperimentReport& r, const ExperimentConfig& config);

}  // namespace gplab
