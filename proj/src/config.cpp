#include "gplab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "gplab/counterexample.hpp"
#include "gplab/errors.hpp"
#include "gplab/multiplier.hpp"

namespace gplab {

namespace {

const std::string kExpsumL4 = "expsum-l4";
const std::string kExpsumLp = "expsum-lp";
const std::string kDivisor = "divisor";
const std::string kMultiplier = "multiplier-scan";
const std::string kDyadic = "dyadic-count";
const std::string kSlice = "endpoint-slice";
const std::string kNls = "nls-converge";
const std::string kHierarchy = "hierarchy-residual";
const std::string kRescale = "rescale-check";
const std::string kSweep = "extremizer-sweep";
const std::string kBump = "bump-verify";

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Throws std::invalid_argument with a short reason; callers attach the key and origin.
std::int64_t parse_int(const std::string& s) {
    const auto caret = s.find('^');
    if (caret != std::string::npos) {
        const std::int64_t base = parse_int(s.substr(0, caret));
        const std::int64_t exp = parse_int(s.substr(caret + 1));
        if (exp < 0 || exp > 62) throw std::invalid_argument("exponent out of range in '" + s + "'");
        std::int64_t v = 1;
        for (std::int64_t i = 0; i < exp; ++i) {
            if (std::abs(v) > std::numeric_limits<std::int64_t>::max() / std::max<std::int64_t>(1, std::abs(base)))
                throw std::invalid_argument("'" + s + "' overflows");
            v *= base;
        }
        return v;
    }
    std::int64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) throw std::invalid_argument("'" + s + "' is not an integer");
    return v;
}

double parse_real(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty() || !std::isfinite(v))
        throw std::invalid_argument("'" + s + "' is not a finite real number");
    return v;
}

// Items: v | lo..hi | lo..hi*r (geometric, r >= 2).
std::vector<std::int64_t> parse_int_list(const std::string& s) {
    std::vector<std::int64_t> out;
    for (const auto& item : split(s, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_int(item));
            continue;
        }
        const std::int64_t lo = parse_int(trim(item.substr(0, dots)));
        std::string rest = item.substr(dots + 2);
        std::int64_t ratio = 0;
        if (const auto star = rest.find('*'); star != std::string::npos) {
            ratio = parse_int(trim(rest.substr(star + 1)));
            rest = rest.substr(0, star);
            if (ratio < 2) throw std::invalid_argument("range ratio must be >= 2 in '" + item + "'");
        }
        const std::int64_t hi = parse_int(trim(rest));
        if (hi < lo) throw std::invalid_argument("empty range '" + item + "'");
        if (ratio == 0) {
            if (hi - lo > 1000000) throw std::invalid_argument("range '" + item + "' is too long");
            for (std::int64_t v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            if (lo <= 0) throw std::invalid_argument("geometric range needs a positive start in '" + item + "'");
            for (std::int64_t v = lo; v <= hi; v *= ratio) {
                out.push_back(v);
                if (v > hi / ratio) break;
            }
        }
    }
    return out;
}

std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
    return out;
}

std::string join_ints(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string fmt_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

const char* type_name(KeyType t) {
    switch (t) {
        case KeyType::integer: return "integer";
        case KeyType::real: return "real";
        case KeyType::text: return "text";
        case KeyType::integers: return "integer list";
        case KeyType::reals: return "real list";
        case KeyType::choice: return "choice";
        case KeyType::boolean: return "boolean";
    }
    return "?";
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("'" + s + "' is not a boolean");
}

std::vector<KeySpec> build_registry() {
    const std::vector<std::string> geometric{kMultiplier, kDyadic, kSlice, kNls, kHierarchy, kRescale, kSweep};
    const std::vector<std::string> expsum{kExpsumL4, kExpsumLp};
    const std::vector<std::string> fields{kNls, kHierarchy};
    std::vector<KeySpec> r;
    auto add = [&](std::string name, KeyType type, std::string def, std::string help,
                   std::vector<std::string> exps, double lo = -kInf, double hi = kInf, bool lo_open = false) -> KeySpec& {
        KeySpec k;
        k.name = std::move(name);
        k.type = type;
        k.default_value = std::move(def);
        k.help = std::move(help);
        k.experiments = std::move(exps);
        k.lo = lo;
        k.hi = hi;
        k.lo_open = lo_open;
        r.push_back(std::move(k));
        return r.back();
    };
    using K = KeyType;

    add("outdir", K::text, "out", "Output directory for the CSV, JSON and checkpoint files.", {});
    add("timestamp", K::text, "auto",
        "File stem suffix. auto: current UTC time as YYYYMMDDTHHMMSSZ. Fix it to get reproducible file names.", {});
    add("threads", K::integer, "1", "Worker threads. Results do not depend on this value.", {}, 1, 256);
    add("seed", K::integer, "1", "Seed of the counter-based generator used for random samples.",
        {kMultiplier, kDyadic, kRescale}, 0);
    add("d", K::integer, "2", "Dimension of the torus.", geometric, 1, 3);
    add("theta", K::reals, "auto",
        "Side parameters theta_1..theta_d (decimal strings). auto: 1.0,1.41421356237 for d = 2, "
        "1.0,1.41421356237,1.73205080757 for d = 3, 1.0 for d = 1.",
        geometric, 0, kInf, true);

    add("n", K::integers, "auto",
        "Lengths N. auto: 16..256*2 for the exponential sums, 8,16 for divisor.", {kExpsumL4, kExpsumLp, kDivisor}, 1,
        1e6);
    add("b", K::integers, "auto",
        "Offsets b of the summation range [b, b+N). auto: 0 for the exponential sums; 10 N^2 + 1 per N for divisor. "
        "For divisor give one value or one per N.",
        {kExpsumL4, kExpsumLp, kDivisor});
    add("p", K::real, "6", "Exponent of the time norm.", {kExpsumLp}, 1);
    add("method", K::choice, "auto", "Time-norm evaluation: trapezoid with the oversampling rule, or the torus lift.",
        expsum)
        .choices = {"auto", "trapezoid", "lifted"};
    add("quadrature_samples", K::integer, "0",
        "Trapezoid intervals for the time norm; 0 applies the oversampling rule and the method key. "
        "A positive value forces the trapezoid and fails when undersampled.",
        expsum, 0);
    add("tolerance", K::real, "auto",
        "Relative (expsum-l4) or absolute (rescale-check) tolerance. auto: 1e-6 and 1e-12.", {kExpsumL4, kRescale}, 0,
        kInf, true);
    add("fit_min_n", K::integer, "16", "Only N >= fit_min_n enter the log-log fit.", {kExpsumL4}, 1);
    add("slope_min", K::real, "1.5", "Fitted slope must exceed this value.", {kExpsumL4});
    add("slope_max", K::real, "auto", "Fitted slope must not exceed this value. auto: 2.2 for p = 4, p - 1.8 otherwise.",
        expsum);

    add("l", K::text, "max", "Target l of k1 (k2 + 2b) = l: an integer list, or max for the maximum over l != 0.",
        {kDivisor});
    add("expect_max", K::integer, "1", "Largest admissible count when l = max.", {kDivisor}, 0);

    add("points", K::text, "0,0;3,1", "Frequencies p, components separated by ',' and points by ';'.",
        {kMultiplier});
    add("taus", K::reals, "0,0.5", "Values of tau.", {kMultiplier});
    add("alpha", K::real, "auto",
        "Regularity index. auto: 1 for multiplier-scan, (d-1)/2 for extremizer-sweep, 0 for hierarchy-residual.",
        {kMultiplier, kHierarchy, kSweep}, 0);
    add("truncations", K::integers, "auto", "Sup-norm truncations R of the double sum. auto: 16,32,64 for d = 2, 4,8 for d = 3.",
        {kMultiplier}, 1, 4096);
    add("tuples", K::integer, "1000", "Random (tau, p, m, n) tuples for the term-wise form check.", {kMultiplier}, 0);
    add("termwise_tol", K::real, "1e-12", "Relative tolerance of the term-wise form check.", {kMultiplier}, 0, kInf,
        true);

    add("samples", K::integer, "auto", "Random samples. auto: 20 for dyadic-count, 100 for rescale-check.",
        {kDyadic, kRescale}, 1);
    add("p_max", K::integer, "64", "Sampled p satisfy |p| <= p_max.", {kDyadic}, 0, 1e6);
    add("p_sampling", K::choice, "log_radius",
        "Distribution of p: uniform on the ball |p| <= p_max, or uniform on a ball whose radius is log-uniform "
        "in [0, p_max].",
        {kDyadic})
        .choices = {"log_radius", "uniform"};
    add("tau_max", K::real, "100", "Sampled tau - Q(p) lies in [-tau_max, tau_max].", {kDyadic}, 0);
    add("caps", K::integers, "4,5,6", "Values of the cap on j_max, ascending.", {kDyadic}, 0, 12);
    add("epsilon", K::real, "0.5", "Epsilon of the counting exponent (d-1) + epsilon.", {kDyadic}, 0, kInf, true);
    add("stability", K::real, "2", "Largest admissible max/min of the per-cap maximal ratio.", {kDyadic}, 1);

    add("kappas", K::integers, "auto",
        "Values of kappa. auto: 2^4..2^14*2 (endpoint-slice) or 2^4..2^12*2 (extremizer-sweep) for d = 2, "
        "2^4..2^9*2 for d = 3.",
        {kSlice, kSweep}, 1, 1e9);
    add("m_rule", K::text, "auto",
        "Transverse range M: square for M = kappa^2, or an integer factor f for M = f kappa. "
        "auto: square (endpoint-slice); 8 for d = 2 and 2 for d = 3 (extremizer-sweep).",
        {kSlice, kSweep});
    add("slice_method", K::choice, "auto", "Summation route of the slice sum.", {kSlice}).choices = {
        "auto", "direct", "row_closed_form"};
    add("r2_min", K::real, "auto", "Smallest admissible R^2 of the fit. auto: 0.99 (endpoint-slice), 0.95 otherwise.",
        {kSlice, kSweep}, 0, 1);

    add("grid", K::integer, "auto", "Points per axis of the spectral grid (power of two). auto: 64 (nls-converge), 32.",
        fields, 4, 1024);
    add("T", K::real, "auto", "Final time. auto: 1 (nls-converge), 0.5 (hierarchy-residual).", fields, 0, kInf, true);
    add("dt", K::real, "1e-3", "Time step of the plane-wave run.", {kNls}, 0, kInf, true);
    add("dts", K::reals, "auto",
        "Halving sequence of time steps. auto: 4e-3,2e-3,1e-3 (nls-converge), 0.05,0.025,0.0125 (hierarchy-residual).",
        fields, 0, kInf, true);
    add("b0", K::real, "1", "Coupling constant of the cubic term.", fields);
    add("amplitude", K::real, "0.8", "Amplitude of the plane wave.", {kNls}, 0);
    add("wave_mode", K::integers, "auto", "Frequency of the plane wave. auto: 3,-2 padded or cut to d components.",
        {kNls});
    add("modes", K::text, "auto",
        "Initial Fourier modes as 'k1,k2:re[,im]' separated by ';'. auto: four low modes (nls-converge), "
        "0,0:0.3;1,0:0.2;0,1:0,0.2 (hierarchy-residual), padded or cut to d components.",
        fields);
    add("refine", K::integer, "16", "Reference step is the finest dt divided by refine.", {kNls}, 2);
    add("error_tol", K::real, "1e-5", "Plane-wave terminal error tolerance.", {kNls}, 0, kInf, true);
    add("mass_tol", K::real, "1e-10", "Relative mass drift tolerance.", {kNls}, 0, kInf, true);
    add("order_min", K::real, "1.8", "Smallest admissible observed order.", fields);
    add("order_max", K::real, "2.2", "Largest admissible observed order.", fields);
    add("stride", K::integer, "1", "Record every stride steps.", {kHierarchy}, 1);
    add("k_max", K::integer, "2", "Highest order of the factorized sequence.", {kHierarchy}, 2, 4);
    add("xi", K::real, "1", "Weight xi of the residual norm sum_k xi^k ||S r_k||.", {kHierarchy}, 0, kInf, true);
    add("variant", K::choice, "standard", "Propagator inside the Duhamel integral: U(t - s) or U(t).", {kHierarchy})
        .choices = {"standard", "verbatim"};
    add("linear_tol", K::real, "1e-10", "Residual tolerance of the b0 = 0 run.", {kHierarchy}, 0, kInf, true);
    add("checkpoint", K::boolean, "false", "Write density checkpoints of the finest run.", {kHierarchy});

    add("order", K::integer, "2", "Order k of the random density matrices.", {kRescale}, 1, 4);
    add("entries", K::integer, "20", "Draws per random matrix.", {kRescale}, 1, 100000);
    add("cutoff", K::integer, "8", "Frequency cutoff of the random matrices.", {kRescale}, 0, 1e6);
    add("times", K::reals, "0,0.37,1.9", "Times t at which the identity is checked.", {kRescale});

    add("delta", K::real, "0.05", "Time horizon of the spacetime norm, or support half-width of the bump.",
        {kSweep, kBump}, 0, kInf, true);
    add("delta2", K::real, "0.025", "Second horizon for the independence check; 0 skips it.", {kSweep}, 0);
    add("quadrature", K::choice, "exact", "Time integration of the spacetime norm.", {kSweep}).choices = {"exact",
                                                                                                        "trapezoid"};
    add("variation_max", K::real, "0.1", "Largest admissible relative variation of the B- part.", {kSweep}, 0);

    add("grid_points", K::integer, "10000", "Frequency grid points.", {kBump}, 2, 1e7);
    add("xi_max", K::real, "50", "Frequency grid half-width.", {kBump}, 0, kInf, true);
    add("time_samples", K::integer, "4000", "Simpson intervals in time (even).", {kBump}, 2, 1e7);
    add("nonneg_tol", K::real, "1e-9", "Transform values above -nonneg_tol count as nonnegative.", {kBump}, 0);
    return r;
}

bool applies(const KeySpec& k, const std::string& exp) {
    return k.experiments.empty() || std::find(k.experiments.begin(), k.experiments.end(), exp) != k.experiments.end();
}

const KeySpec* find_key(const std::string& name) {
    for (const auto& k : key_registry())
        if (k.name == name) return &k;
    return nullptr;
}

std::string pad_point(std::vector<std::int64_t> v, int d) {
    v.resize(static_cast<std::size_t>(d), 0);
    return join_ints(v);
}

std::string pad_modes(const std::vector<std::pair<std::vector<std::int64_t>, std::string>>& modes, int d) {
    std::string s;
    for (std::size_t i = 0; i < modes.size(); ++i) s += (i ? ";" : "") + pad_point(modes[i].first, d) + ":" + modes[i].second;
    return s;
}

std::string auto_default(const std::string& exp, const std::string& key, const ExperimentConfig& c) {
    const auto d = c.has("d") ? c.dim() : 2;
    if (key == "theta") {
        if (d == 1) return "1.0";
        if (d == 2) return "1.0,1.41421356237";
        return "1.0,1.41421356237,1.73205080757";
    }
    if (key == "n") return exp == kDivisor ? "8,16" : "16,32,64,128,256";
    if (key == "b") {
        if (exp != kDivisor) return "0";
        std::vector<std::int64_t> b;
        for (auto n : c.integers("n")) b.push_back(10 * n * n + 1);
        return join_ints(b);
    }
    if (key == "tolerance") return exp == kRescale ? "1e-12" : "1e-6";
    if (key == "slope_max") return exp == kExpsumL4 ? "2.2" : fmt_real(c.real("p") - 1.8);
    if (key == "alpha") {
        if (exp == kMultiplier) return "1";
        if (exp == kSweep) return fmt_real(0.5 * (d - 1));
        return "0";
    }
    if (key == "truncations") return d == 3 ? "4,8" : "16,32,64";
    if (key == "samples") return exp == kDyadic ? "20" : "100";
    if (key == "kappas") {
        std::vector<std::int64_t> k;
        const int top = d == 3 ? 9 : (exp == kSlice ? 14 : 12);
        for (int e = 4; e <= top; ++e) k.push_back(std::int64_t{1} << e);
        return join_ints(k);
    }
    if (key == "m_rule") return exp == kSlice ? "square" : (d == 3 ? "2" : "8");
    if (key == "r2_min") return exp == kSlice ? "0.99" : "0.95";
    if (key == "grid") return exp == kNls ? "64" : "32";
    if (key == "T") return exp == kNls ? "1" : "0.5";
    if (key == "dts") return exp == kNls ? "4e-3,2e-3,1e-3" : "0.05,0.025,0.0125";
    if (key == "wave_mode") return pad_point({3, -2, 1}, d);
    if (key == "modes") {
        if (exp == kNls) return pad_modes({{{0, 0}, "0.6"}, {{1, 0}, "0.3,0.1"}, {{0, -1}, "0,0.3"}, {{-2, 1}, "0.1"}}, d);
        return pad_modes({{{0, 0}, "0.3"}, {{1, 0}, "0.2"}, {{0, 1}, "0,0.2"}}, d);
    }
    if (key == "timestamp") {
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
        return buf;
    }
    throw std::logic_error("no automatic default for key " + key);
}

void check_value(const KeySpec& k, const std::string& value, const std::string& origin) {
    auto fail = [&](const std::string& why) {
        throw ConfigError(k.name + ": " + why + " (" + origin + ")");
    };
    auto range = [&](double v, const std::string& shown) {
        if ((k.lo_open ? v <= k.lo : v < k.lo) || v > k.hi) {
            std::string r = "must lie in ";
            r += k.lo_open ? "(" : "[";
            r += std::isinf(k.lo) ? "-inf" : fmt_real(k.lo);
            r += ", ";
            r += std::isinf(k.hi) ? "inf" : fmt_real(k.hi);
            r += "]";
            fail("value " + shown + " " + r);
        }
    };
    try {
        switch (k.type) {
            case KeyType::integer: {
                const auto v = parse_int(value);
                range(double(v), value);
                break;
            }
            case KeyType::real: range(parse_real(value), value); break;
            case KeyType::integers: {
                const auto v = parse_int_list(value);
                if (v.empty()) fail("empty list");
                for (auto x : v) range(double(x), std::to_string(x));
                break;
            }
            case KeyType::reals: {
                const auto v = parse_real_list(value);
                if (v.empty()) fail("empty list");
                for (auto x : v) range(x, fmt_real(x));
                break;
            }
            case KeyType::choice:
                if (std::find(k.choices.begin(), k.choices.end(), value) == k.choices.end()) {
                    std::string opts;
                    for (const auto& c : k.choices) opts += (opts.empty() ? "" : ", ") + c;
                    fail("'" + value + "' is not one of " + opts);
                }
                break;
            case KeyType::boolean: parse_bool(value); break;
            case KeyType::text:
                if (value.empty()) fail("empty value");
                break;
        }
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

std::vector<LatticePoint> parse_point_list(const std::string& s, int d, const std::string& key) {
    std::vector<LatticePoint> out;
    for (const auto& item : split(s, ';')) {
        std::vector<std::int64_t> c;
        try {
            c = parse_int_list(item);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key + ": " + e.what());
        }
        if (static_cast<int>(c.size()) != d)
            throw ConfigError(key + ": point '" + item + "' has " + std::to_string(c.size()) + " components, d = " +
                              std::to_string(d));
        out.push_back(LatticePoint::from(std::span<const std::int64_t>(c)));
    }
    return out;
}

void cross_validate(ExperimentConfig& c) {
    const std::string& exp = c.experiment;
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    for (char ch : c.text("timestamp"))
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.')
            fail("timestamp: only letters, digits, '-', '_' and '.' are allowed");
    if (c.has("theta") && static_cast<int>(c.reals("theta").size()) != c.dim())
        fail("theta: expected " + std::to_string(c.dim()) + " entries for d = " + std::to_string(c.dim()));
    if (exp == kSlice || exp == kSweep || exp == kMultiplier || exp == kDyadic || exp == kRescale) {
        if (c.dim() < 2) fail("d: " + exp + " needs d in {2, 3}");
    }
    if (exp == kExpsumLp && c.real("p") < 2.0) fail("p: must be >= 2");
    if (exp == kExpsumL4 || exp == kExpsumLp) {
        const auto n = c.integers("n");
        if (exp == kExpsumLp && n.size() < 2) fail("n: the slope fit needs at least two values");
    }
    if (exp == kDivisor) {
        const auto b = c.integers("b"), n = c.integers("n");
        if (b.size() != 1 && b.size() != n.size())
            fail("b: give one offset or one per N (" + std::to_string(n.size()) + ")");
        if (c.text("l") != "max") {
            try {
                parse_int_list(c.text("l"));
            } catch (const std::invalid_argument& e) {
                fail(std::string("l: ") + e.what() + "; use an integer list or max");
            }
        }
    }
    if (exp == kMultiplier) {
        parse_point_list(c.text("points"), c.dim(), "points");
        if (!(c.real("alpha") > 0.0)) fail("alpha: multiplier-scan needs alpha > 0");
    }
    if (exp == kDyadic) {
        const auto caps = c.integers("caps");
        if (!std::is_sorted(caps.begin(), caps.end())) fail("caps: must be ascending");
    }
    if (exp == kSlice || exp == kSweep) {
        const auto kappas = c.integers("kappas");
        if (kappas.size() < 2) fail("kappas: the fit needs at least two values");
        if (c.dim() == 3 && exp == kSlice && *std::max_element(kappas.begin(), kappas.end()) > 4096)
            fail("kappas: d = 3 is limited to kappa <= 2^12");
        const std::string rule = c.text("m_rule");
        if (rule != "square") {
            std::int64_t f = 0;
            try {
                f = parse_int(rule);
            } catch (const std::invalid_argument&) {
                fail("m_rule: '" + rule + "' is neither square nor an integer factor");
            }
            if (f < 1) fail("m_rule: factor must be >= 1");
        }
        const QuadraticForm form = c.form();
        for (auto k : kappas) require_forcing(form, double(k));
    }
    if (exp == kNls || exp == kHierarchy) {
        const auto g = c.integer("grid");
        if ((g & (g - 1)) != 0) fail("grid: " + std::to_string(g) + " is not a power of two");
        const auto dts = c.reals("dts");
        if (dts.size() < 2) fail("dts: the order study needs at least two steps");
        for (std::size_t i = 1; i < dts.size(); ++i)
            if (!(dts[i] < dts[i - 1])) fail("dts: steps must decrease");
        const double T = c.real("T");
        auto divides = [&](double dt, const std::string& key) {
            const double steps = T / dt;
            if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
                fail(key + ": " + fmt_real(dt) + " does not divide T = " + fmt_real(T));
        };
        for (double dt : dts) divides(dt, "dts");
        if (exp == kNls) {
            divides(c.real("dt"), "dt");
            const auto w = c.integers("wave_mode");
            if (static_cast<int>(w.size()) != c.dim()) fail("wave_mode: expected d components");
            for (auto x : w)
                if (x < -g / 2 || x >= g / 2) fail("wave_mode: component outside the grid band");
        }
        (void)parse_modes(c.text("modes"), c.dim(), g);
    }
    if (exp == kBump) {
        const double thr = ZetaBump::delta_threshold();
        if (c.real("delta") > thr)
            throw PreconditionError("delta: " + fmt_real(c.real("delta")) + " exceeds the admissible threshold " +
                                    fmt_real(thr));
        if (c.integer("time_samples") % 2 != 0) fail("time_samples: must be even");
    }
}

}  // namespace

SingleParticleState parse_modes(const std::string& text, int d, std::int64_t grid) {
    SingleParticleState out;
    for (const auto& item : split(text, ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("modes: '" + item + "' lacks ':'");
        const auto pts = parse_point_list(item.substr(0, colon), d, "modes");
        std::vector<double> v;
        try {
            v = parse_real_list(item.substr(colon + 1));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("modes: ") + e.what());
        }
        if (v.empty() || v.size() > 2) throw ConfigError("modes: value of '" + item + "' must be re or re,im");
        const LatticePoint& p = pts.front();
        for (int a = 0; a < d; ++a)
            if (grid > 0 && (p[a] < -grid / 2 || p[a] >= grid / 2))
                throw ConfigError("modes: frequency " + p.str() + " outside the grid band");
        for (const auto& [q, _] : out)
            if (q == p) throw ConfigError("modes: frequency " + p.str() + " repeated");
        out.emplace_back(p, cplx(v[0], v.size() > 1 ? v[1] : 0.0));
    }
    return out;
}

std::vector<LatticePoint> parse_points(const std::string& text, int d) { return parse_point_list(text, d, "points"); }

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{kExpsumL4, kExpsumLp, kDivisor,   kMultiplier, kDyadic, kSlice,
                                                kNls,      kHierarchy, kRescale, kSweep,      kBump};
    return names;
}

const std::vector<KeySpec>& key_registry() {
    static const std::vector<KeySpec> registry = build_registry();
    return registry;
}

std::vector<const KeySpec*> keys_for(const std::string& experiment) {
    std::vector<const KeySpec*> out;
    for (const auto& k : key_registry())
        if (applies(k, experiment)) out.push_back(&k);
    return out;
}

std::string keys_markdown() {
    std::ostringstream os;
    os << "# Configuration keys\n\n"
       << "Generated by `lab keys`; do not edit by hand.\n\n"
       << "A config file holds `key = value` lines in sections. `[common]` applies to every experiment\n"
       << "that accepts the key; `[<experiment>]` applies to that experiment only. Lines before the first\n"
       << "header belong to `[common]`. Lines starting with `#` or `;` are comments, and ` #` starts a\n"
       << "trailing comment. Flags `--key value` override the file.\n\n"
       << "Integer lists accept `v`, `lo..hi` and geometric `lo..hi*r` items separated by commas, and\n"
       << "integers may be written as powers, e.g. `2^4..2^12*2`. `auto` selects the documented default.\n";
    for (const auto& exp : experiment_names()) {
        os << "\n## " << exp << "\n\n| key | type | default | description |\n|---|---|---|---|\n";
        for (const KeySpec* k : keys_for(exp)) {
            std::string type = type_name(k->type);
            if (k->type == KeyType::choice) {
                type += ": ";
                for (std::size_t i = 0; i < k->choices.size(); ++i) type += (i ? " / " : "") + k->choices[i];
            }
            std::string range;
            if (!std::isinf(k->lo) || !std::isinf(k->hi)) {
                range = k->lo_open ? " Range (" : " Range [";
                range += std::isinf(k->lo) ? "-inf" : fmt_real(k->lo);
                range += ", ";
                range += std::isinf(k->hi) ? "inf" : fmt_real(k->hi);
                range += "].";
            }
            os << "| `" << k->name << "` | " << type << " | `" << k->default_value << "` | " << k->help << range
               << " |\n";
        }
    }
    return os.str();
}

ConfigFile parse_config_text(std::string_view text, const std::string& origin) {
    ConfigFile cf;
    cf.origin = origin;
    std::string section = "common";
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(raw);
        // Full-line comments start with '#' or ';'; inline comments with " #".
        if (!line.empty() && (line[0] == '#' || line[0] == ';')) line.clear();
        if (const auto h = line.find(" #"); h != std::string::npos) line = trim(line.substr(0, h));
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "common" && std::find(experiment_names().begin(), experiment_names().end(), section) ==
                                           experiment_names().end())
                throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (!find_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        auto& sec = cf.sections[section];
        if (sec.count(key))
            throw ConfigError(where + ": duplicate key '" + key + "' (first at line " +
                              std::to_string(sec[key].line) + ")");
        sec[key] = ConfigEntry{value, line_no};
    }
    return cf;
}

ConfigFile parse_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

const std::string& ExperimentConfig::text(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError("key '" + key + "' is not defined for " + experiment);
    return it->second;
}

std::int64_t ExperimentConfig::integer(const std::string& key) const { return parse_int(text(key)); }
double ExperimentConfig::real(const std::string& key) const { return parse_real(text(key)); }
bool ExperimentConfig::boolean(const std::string& key) const { return parse_bool(text(key)); }
std::vector<std::int64_t> ExperimentConfig::integers(const std::string& key) const {
    return parse_int_list(text(key));
}
std::vector<double> ExperimentConfig::reals(const std::string& key) const { return parse_real_list(text(key)); }

QuadraticForm ExperimentConfig::form() const { return QuadraticForm(reals("theta")); }

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values) j[k] = v;
    return j;
}

ExperimentConfig resolve_config(const std::string& experiment, const ConfigFile* file,
                                const std::map<std::string, std::string>& flags) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end()) {
        std::string known;
        for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown experiment '" + experiment + "' (known: " + known + ")");
    }
    ExperimentConfig c;
    c.experiment = experiment;
    std::map<std::string, std::string> origin;
    const auto keys = keys_for(experiment);
    for (const KeySpec* k : keys) {
        c.values[k->name] = k->default_value;
        origin[k->name] = "default";
    }
    if (file) {
        for (const char* sec : {"common", experiment.c_str()}) {
            const auto it = file->sections.find(sec);
            if (it == file->sections.end()) continue;
            for (const auto& [key, entry] : it->second) {
                const std::string where = file->origin + ":" + std::to_string(entry.line);
                if (!c.values.count(key)) {
                    if (std::string(sec) == "common") continue;  // shared section may carry other experiments' keys
                    throw ConfigError(where + ": key '" + key + "' does not apply to " + experiment);
                }
                c.values[key] = entry.value;
                origin[key] = where;
            }
        }
    }
    for (const auto& [key, value] : flags) {
        if (!c.values.count(key)) throw ConfigError("--" + key + ": not a key of " + experiment);
        c.values[key] = trim(value);
        origin[key] = "--" + key;
    }
    // Registry order puts d before the keys whose defaults depend on it.
    for (const KeySpec* k : keys) {
        std::string& v = c.values[k->name];
        if (v == "auto" && k->type != KeyType::choice) {
            v = auto_default(experiment, k->name, c);
            if (k->name == "theta")
                c.notices.push_back("theta not set; using the default " + v + " for d = " + std::to_string(c.dim()));
        }
        check_value(*k, v, origin[k->name]);
    }
    cross_validate(c);
    return c;
}

}  // namespace gplab
