// lab <experiment> [--config FILE] [--key value ...]
// lab keys [--output FILE]
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "gplab/config.hpp"
#include "gplab/errors.hpp"
#include "gplab/experiments.hpp"
#include "gplab/report.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kResolution = 3 };

struct Invocation {
    std::string config_path;
    std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
    using namespace gplab;
    CLI::App app{"Numerical laboratory for dispersive estimates on rectangular tori"};
    app.require_subcommand(1);

    std::string keys_output;
    auto* keys = app.add_subcommand("keys", "Print the configuration key reference (Markdown)");
    keys->add_option("--output", keys_output, "Write to this file instead of stdout");

    std::map<std::string, Invocation> inv;
    for (const auto& exp : experiment_names()) {
        auto* sub = app.add_subcommand(exp, "Run the " + exp + " experiment");
        auto& slot = inv[exp];
        sub->add_option("--config", slot.config_path, "Config file")->check(CLI::ExistingFile);
        for (const KeySpec* k : keys_for(exp)) {
            sub->add_option_function<std::string>(
                "--" + k->name, [&slot, name = k->name](const std::string& v) { slot.flags[name] = v; },
                k->help + " [default: " + k->default_value + "]");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    if (keys->parsed()) {
        const std::string md = keys_markdown();
        if (keys_output.empty()) {
            std::cout << md;
        } else {
            std::ofstream os(keys_output, std::ios::binary);
            os << md;
            if (!os) {
                std::cerr << "error: cannot write " << keys_output << "\n";
                return kUsage;
            }
        }
        return kPass;
    }

    const std::string exp = app.get_subcommands().front()->get_name();
    const Invocation& call = inv[exp];
    try {
        ConfigFile file;
        const bool have_file = !call.config_path.empty();
        if (have_file) file = parse_config_file(call.config_path);
        const ExperimentConfig config = resolve_config(exp, have_file ? &file : nullptr, call.flags);
        for (const auto& n : config.notices) std::cerr << "notice: " << n << "\n";
        const ExperimentReport report = run_experiment(config);
        for (const auto& n : report.notices) std::cerr << "notice: " << n << "\n";
        const auto files = write_report(report, config);
        for (const auto& c : report.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_cell(c.value) << " ("
                      << c.requirement << ")\n";
        std::cout << "rows: " << report.rows.size() << "\n"
                  << "csv:  " << files.csv.string() << "\n"
                  << "json: " << files.json.string() << "\n";
        return report.pass() ? kPass : kFail;
    } catch (const ResolutionError& e) {
        std::cerr << "resolution error: " << e.what() << "\n";
        return kResolution;
    } catch (const LatticeError& e) {
        std::cerr << "lattice error: " << e.what() << "\n";
        return kResolution;
    } catch (const OverflowError& e) {
        std::cerr << "overflow: " << e.what() << "\n";
        return kResolution;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
