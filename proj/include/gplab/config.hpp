#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gplab/density.hpp"
#include "gplab/torus.hpp"

namespace gplab {

enum class KeyType { integer, real, text, integers, reals, choice, boolean };

struct KeySpec {
    std::string name;
    KeyType type = KeyType::text;
    // "auto" marks a default resolved from other keys (see help text).
    std::string default_value;
    std::string help;
    std::vector<std::string> experiments;  // empty: every experiment
    std::vector<std::string> choices;      // KeyType::choice only
    // Numeric range, applied to every element of list keys.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false;
};

const std::vector<std::string>& experiment_names();
const std::vector<KeySpec>& key_registry();
// Keys accepted by one experiment, registry order.
std::vector<const KeySpec*> keys_for(const std::string& experiment);
// Markdown reference of every key; docs/CONFIG.md is generated from this.
std::string keys_markdown();

// Parsed INI-style file: [section] headers, key = value lines, '#' or ';' comments.
// Keys before any header belong to section "common".
struct ConfigEntry {
    std::string value;
    int line = 0;
};
struct ConfigFile {
    std::string origin;
    std::map<std::string, std::map<std::string, ConfigEntry>> sections;
};

ConfigFile parse_config_text(std::string_view text, const std::string& origin = "<config>");
ConfigFile parse_config_file(const std::filesystem::path& path);

class ExperimentConfig {
public:
    std::string experiment;
    std::map<std::string, std::string> values;  // every key of the experiment, resolved
    std::vector<std::string> notices;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const std::string& text(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<std::int64_t> integers(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;

    int dim() const { return static_cast<int>(integer("d")); }
    QuadraticForm form() const;
    unsigned threads() const { return static_cast<unsigned>(integer("threads")); }

    nlohmann::json to_json() const;
};

// "k1,k2:re[,im];..." with d components per frequency; grid > 0 bounds each
// component to [-grid/2, grid/2).
SingleParticleState parse_modes(const std::string& text, int d, std::int64_t grid = 0);
// "x1,x2;y1,y2;..."
std::vector<LatticePoint> parse_points(const std::string& text, int d);

// Precedence: flags > [experiment] section > [common] section > defaults.
// Throws ConfigError (file/flag diagnostics, range violations) and
// PreconditionError (experiment preconditions such as the forcing threshold).
ExperimentConfig resolve_config(const std::string& experiment, const ConfigFile* file,
                                const std::map<std::string, std::string>& flags);

}  // namespace gplab
