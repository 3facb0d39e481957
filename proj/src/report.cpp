#include "gplab/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "gplab/errors.hpp"

#ifndef GPLAB_BUILD_ID
#define GPLAB_BUILD_ID "unknown"
#endif

namespace gplab {

void ExperimentReport::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw std::logic_error(experiment + ": row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

void ExperimentReport::check(std::string name, bool pass, double value, std::string requirement) {
    checks.push_back(Check{std::move(name), pass, value, std::move(requirement)});
}

bool ExperimentReport::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const Check* ExperimentReport::find_check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string build_id() { return GPLAB_BUILD_ID; }

std::string format_cell(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, *d);
        return std::string(buf, r.ptr);
    }
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

std::string report_csv(const ExperimentReport& r) {
    std::string out = "schema_version";
    for (const auto& c : r.columns) out += "," + c;
    out += "\n";
    for (const auto& row : r.rows) {
        out += std::to_string(r.schema_version);
        for (const auto& cell : row) out += "," + format_cell(cell);
        out += "\n";
    }
    return out;
}

namespace {

nlohmann::json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

nlohmann::json report_json(const ExperimentReport& r, const ExperimentConfig& config) {
    nlohmann::json j;
    j["experiment"] = r.experiment;
    j["schema_version"] = r.schema_version;
    j["build_id"] = build_id();
    j["threads"] = config.threads();
    j["config"] = config.to_json();
    nlohmann::json notices = nlohmann::json::array();
    for (const auto& n : config.notices) notices.push_back(n);
    for (const auto& n : r.notices) notices.push_back(n);
    j["notices"] = notices;
    j["row_count"] = r.rows.size();
    j["columns"] = r.columns;
    j["summary"] = r.summary;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", finite_or_string(c.value)},
                          {"requirement", c.requirement}});
    j["checks"] = checks;
    j["pass"] = r.pass();
    return j;
}

ReportFiles write_report(const ExperimentReport& r, const ExperimentConfig& config) {
    const std::filesystem::path dir = config.text("outdir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("outdir: cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = r.experiment + "-" + config.text("timestamp");
    ReportFiles files{dir / (stem + ".csv"), dir / (stem + ".json"), dir / (stem + ".timing.json")};
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream os(p, std::ios::binary);
        os << text;
        if (!os) throw ConfigError("cannot write " + p.string());
    };
    write(files.csv, report_csv(r));
    write(files.json, report_json(r, config).dump(2) + "\n");
    nlohmann::json t;
    t["wall_clock_seconds"] = r.wall_clock_seconds;
    write(files.timing, t.dump(2) + "\n");
    return files;
}

}  // namespace gplab
