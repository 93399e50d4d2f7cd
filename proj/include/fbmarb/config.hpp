#pragma once

// Run configuration: a flat `key = value` text format with optional
// `[section]` headers, resolved against the basis setting defaults.
//
//   strategy = "salopek"     # or "shiryaev"
//   alpha = "-inf"           # numbers or the literals inf / -inf
//   p1 = 0.1                 # proportional cost in percent
//   [asset.2]
//   hurst = 0.7
//   [sweep]
//   axis = "hurst"
//   values = "0.51, 0.55, 0.6"
//
// Keys inside a section are addressed as "section.key" (asset.2.hurst).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fbmarb/error.hpp"
#include "fbmarb/fbm.hpp"
#include "fbmarb/ledger.hpp"
#include "fbmarb/market.hpp"
#include "fbmarb/montecarlo.hpp"
#include "fbmarb/strategy.hpp"

namespace fbmarb {

using ConfigValues = std::map<std::string, std::string>;

/// Shortest decimal representation that round-trips.
inline std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

// Strips a trailing comment that is not inside quotes.
inline std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote != 0) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace detail

/// Parses config text into raw values. Duplicate keys: last one wins.
inline ConfigValues parse_config_text(std::string_view text) {
    ConfigValues values;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
        values[section.empty() ? key : section + "." + key] = detail::unquote(detail::trim(std::string_view(line).substr(eq + 1)));
    }
    return values;
}

struct SweepSpec {
    SweepField field = SweepField::hurst;
    std::string values;  // raw grid text as configured
    SweepAxis axis;      // resolved, internal units
    std::size_t n_scenarios = 10000;
};

struct RunConfig {
    ExperimentConfig experiment;
    double p1_percent = 0.0;
    std::filesystem::path output = "out";
    std::size_t histogram_bins = 50;
    std::optional<SweepSpec> sweep;
    ConfigValues resolved;  // every effective key, for provenance
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    if (t == "-inf" || t == "-infinity") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
}

inline double parse_finite(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (!std::isfinite(v)) throw ConfigError(key, "expected a finite number, got '" + text + "'");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
}

inline std::string default_grid(SweepField f) {
    switch (f) {
        case SweepField::drift: return "-0.2, -0.1, 0, 0.1, 0.2";
        case SweepField::volatility: return "0.05, 0.1, 0.15";
        case SweepField::hurst: return "0.51, 0.55, 0.6, 0.65, 0.7";
        case SweepField::horizon: {
            std::vector<double> v;
            for (int k = 1; k <= 20; ++k) v.push_back(0.5 * k);
            return join(v);
        }
        case SweepField::n_periods: return "250, 125, 50, 25, 12";
        case SweepField::costs: return "0:0, 0.1:0, 0.1:0.5";
        case SweepField::hurst_pair: return "0.51, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99";
        case SweepField::alpha_beta: return "-inf, -30, -25, -20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30, inf";
        default: return {};
    }
}

}  // namespace detail

/// Grid points in internal units. Proportional costs are given in percent.
inline SweepAxis parse_sweep_axis(SweepField field, const std::string& values) {
    SweepAxis axis;
    axis.field = field;
    const std::string key = "sweep.values";
    if (field == SweepField::costs) {
        for (const auto& item : detail::split(values, ',')) {
            const auto parts = detail::split(item, ':');
            if (parts.size() != 2) throw ConfigError(key, "cost grid points are written p1:p2, got '" + item + "'");
            axis.points.push_back({detail::parse_finite(key, parts[0]) / 100.0, detail::parse_finite(key, parts[1])});
        }
    } else {
        std::vector<double> v;
        for (const auto& item : detail::split(values, ','))
            v.push_back(field == SweepField::alpha_beta ? detail::parse_real(key, item) : detail::parse_finite(key, item));
        if (field == SweepField::hurst_pair)
            axis.points = ordered_pairs(v, false);
        else if (field == SweepField::alpha_beta)
            axis.points = ordered_pairs(v, true);
        else
            for (double x : v) axis.points.push_back({field == SweepField::p1 ? x / 100.0 : x});
    }
    if (axis.points.empty()) throw ConfigError(key, "sweep grid is empty");
    return axis;
}

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "strategy", "gamma", "alpha", "beta", "p1", "p2", "n_scenarios", "generator", "output", "seed",
        "threads", "horizon", "n_periods", "d", "mu", "sigma", "hurst", "s0", "bins"};
    return keys;
}

inline const std::vector<std::string>& known_sweep_keys() {
    static const std::vector<std::string> keys = {"axis", "values", "n_scenarios"};
    return keys;
}

inline const std::vector<std::string>& known_asset_keys() {
    static const std::vector<std::string> keys = {"mu", "sigma", "hurst", "s0"};
    return keys;
}

/// Applies defaults (the basis setting) and validates. Every effective value
/// is echoed into `resolved` for provenance.
inline RunConfig resolve_config(const ConfigValues& input) {
    using detail::parse_finite;
    using detail::parse_real;
    using detail::parse_unsigned;

    // Reject unknown keys first so typos never fall through to defaults.
    for (const auto& [key, value] : input) {
        if (std::find(known_config_keys().begin(), known_config_keys().end(), key) != known_config_keys().end()) continue;
        if (key.rfind("sweep.", 0) == 0) {
            const auto sub = key.substr(6);
            if (std::find(known_sweep_keys().begin(), known_sweep_keys().end(), sub) != known_sweep_keys().end()) continue;
        }
        if (key.rfind("asset.", 0) == 0) {
            const auto dot = key.find('.', 6);
            if (dot != std::string::npos) {
                const auto sub = key.substr(dot + 1);
                if (std::find(known_asset_keys().begin(), known_asset_keys().end(), sub) != known_asset_keys().end()) {
                    parse_unsigned(key, key.substr(6, dot - 6));
                    continue;
                }
            }
        }
        throw ConfigError(key, "unknown key");
    }

    auto get = [&](const std::string& key, const std::string& fallback) {
        const auto it = input.find(key);
        return it == input.end() ? fallback : it->second;
    };

    RunConfig rc;
    auto& res = rc.resolved;
    auto& ex = rc.experiment;

    const std::string strategy = detail::trim(get("strategy", "shiryaev"));
    const double gamma = parse_finite("gamma", get("gamma", "100"));
    if (!(gamma > 0.0)) throw ConfigError("gamma", "must be positive");
    res["strategy"] = strategy;
    res["gamma"] = format_double(gamma);
    std::size_t default_d = 1;
    if (strategy == "shiryaev") {
        ex.strategy = Shiryaev{gamma};
        if (input.count("alpha") || input.count("beta")) throw ConfigError(input.count("alpha") ? "alpha" : "beta", "only valid for strategy = \"salopek\"");
    } else if (strategy == "salopek") {
        const double alpha = parse_real("alpha", get("alpha", "-30"));
        const double beta = parse_real("beta", get("beta", "30"));
        if (!(alpha < beta)) throw ConfigError("alpha", "Salopek requires alpha < beta");
        ex.strategy = Salopek{PowerOrder(alpha), PowerOrder(beta), gamma};
        res["alpha"] = format_double(alpha);
        res["beta"] = format_double(beta);
        default_d = 2;
    } else {
        throw ConfigError("strategy", "expected \"shiryaev\" or \"salopek\", got '" + strategy + "'");
    }

    const auto d = static_cast<std::size_t>(parse_unsigned("d", get("d", std::to_string(default_d))));
    if (strategy == "shiryaev" && d != 1) throw ConfigError("d", "Shiryaev strategy trades exactly one risky asset");
    if (strategy == "salopek" && d < 2) throw ConfigError("d", "Salopek strategy needs at least two risky assets");
    res["d"] = std::to_string(d);

    AssetParams base;
    base.drift = parse_finite("mu", get("mu", "0.05"));
    base.volatility = parse_finite("sigma", get("sigma", "0.1"));
    base.hurst = parse_finite("hurst", get("hurst", "0.6"));
    base.initial_price = parse_finite("s0", get("s0", "100"));
    res["mu"] = format_double(base.drift);
    res["sigma"] = format_double(base.volatility);
    res["hurst"] = format_double(base.hurst);
    res["s0"] = format_double(base.initial_price);

    ex.market.assets.assign(d, base);
    for (const auto& [key, value] : input) {
        if (key.rfind("asset.", 0) != 0) continue;
        const auto dot = key.find('.', 6);
        const auto index = parse_unsigned(key, key.substr(6, dot - 6));
        if (index < 1 || index > d) throw ConfigError(key, "asset index out of range 1.." + std::to_string(d));
        auto& a = ex.market.assets[index - 1];
        const auto field = key.substr(dot + 1);
        const double v = parse_finite(key, value);
        if (field == "mu") a.drift = v;
        else if (field == "sigma") a.volatility = v;
        else if (field == "hurst") a.hurst = v;
        else a.initial_price = v;
        res[key] = format_double(v);
    }
    for (std::size_t i = 0; i < d; ++i) {
        const auto& a = ex.market.assets[i];
        const std::string where = d == 1 ? "" : "asset." + std::to_string(i + 1) + ".";
        if (!(a.volatility > 0.0)) throw ConfigError(where + "sigma", "volatility must be positive");
        if (!(a.initial_price > 0.0)) throw ConfigError(where + "s0", "initial price must be positive");
        if (!(a.hurst > 0.5 && a.hurst < 1.0)) throw ConfigError(where + "hurst", "must lie in (0.5, 1)");
    }

    ex.market.horizon = parse_finite("horizon", get("horizon", "1"));
    if (!(ex.market.horizon > 0.0)) throw ConfigError("horizon", "must be positive");
    ex.market.n_periods = parse_unsigned("n_periods", get("n_periods", "250"));
    if (ex.market.n_periods < 2) throw ConfigError("n_periods", "need at least 2 trading periods");
    ex.market.master_seed = parse_unsigned("seed", get("seed", "20200101"));
    res["horizon"] = format_double(ex.market.horizon);
    res["n_periods"] = std::to_string(ex.market.n_periods);
    res["seed"] = std::to_string(ex.market.master_seed);

    const std::string generator = detail::trim(get("generator", "spectral"));
    if (generator == "spectral") ex.market.generator = GeneratorKind::spectral;
    else if (generator == "exact") ex.market.generator = GeneratorKind::exact;
    else throw ConfigError("generator", "expected \"spectral\" or \"exact\", got '" + generator + "'");
    if (ex.market.generator == GeneratorKind::exact && ex.market.n_periods > ExactFbm::max_steps)
        throw ConfigError("n_periods", "exact generator supports at most " + std::to_string(ExactFbm::max_steps) + " periods");
    res["generator"] = generator;

    rc.p1_percent = parse_finite("p1", get("p1", "0"));
    const double p2 = parse_finite("p2", get("p2", "0"));
    if (rc.p1_percent < 0.0) throw ConfigError("p1", "must be non-negative");
    if (p2 < 0.0) throw ConfigError("p2", "must be non-negative");
    ex.costs = CostSchedule::from_percent(rc.p1_percent, p2);
    res["p1"] = format_double(rc.p1_percent);
    res["p2"] = format_double(p2);

    ex.n_scenarios = parse_unsigned("n_scenarios", get("n_scenarios", "100000"));
    if (ex.n_scenarios < 1) throw ConfigError("n_scenarios", "must be at least 1");
    res["n_scenarios"] = std::to_string(ex.n_scenarios);
    ex.threads = static_cast<unsigned>(parse_unsigned("threads", get("threads", "0")));

    rc.output = detail::trim(get("output", "out"));
    rc.histogram_bins = parse_unsigned("bins", get("bins", "50"));
    if (rc.histogram_bins < 1) throw ConfigError("bins", "must be at least 1");
    res["bins"] = std::to_string(rc.histogram_bins);

    if (input.count("sweep.axis") || input.count("sweep.values") || input.count("sweep.n_scenarios")) {
        if (!input.count("sweep.axis")) throw ConfigError("sweep.axis", "missing sweep axis");
        SweepSpec s;
        s.field = parse_sweep_field(detail::trim(input.at("sweep.axis")));
        s.values = get("sweep.values", detail::default_grid(s.field));
        if (s.values.empty()) throw ConfigError("sweep.values", "no default grid for this axis; give values");
        s.axis = parse_sweep_axis(s.field, s.values);
        s.n_scenarios = parse_unsigned("sweep.n_scenarios", get("sweep.n_scenarios", "10000"));
        if (s.n_scenarios < 1) throw ConfigError("sweep.n_scenarios", "must be at least 1");
        // Probe every grid point now so invalid combinations fail before any simulation.
        for (const auto& point : s.axis.points) {
            const auto probe = apply_sweep_point(ex, s.field, point);
            try {
                validate(probe.market);
                validate(probe.strategy);
                validate(probe.costs);
            } catch (const DomainError& e) {
                throw ConfigError("sweep.values", e.what());
            }
        }
        res["sweep.axis"] = sweep_field_name(s.field);
        res["sweep.values"] = s.values;
        res["sweep.n_scenarios"] = std::to_string(s.n_scenarios);
        rc.sweep = std::move(s);
    }
    return rc;
}

/// Canonical config text; parse_config_text(to_config_text(rc)) resolves to the same run.
inline std::string to_config_text(const ConfigValues& resolved, std::string_view line_prefix = "") {
    std::string out;
    std::string section;
    // Top-level keys first, then sections.
    for (const auto& [key, value] : resolved)
        if (key.find('.') == std::string::npos)
            out += std::string(line_prefix) + key + " = \"" + value + "\"\n";
    for (const auto& [key, value] : resolved) {
        const auto dot = key.rfind('.');
        if (dot == std::string::npos) continue;
        const auto sec = key.substr(0, dot);
        if (sec != section) {
            out += std::string(line_prefix) + "[" + sec + "]\n";
            section = sec;
        }
        out += std::string(line_prefix) + key.substr(dot + 1) + " = \"" + value + "\"\n";
    }
    return out;
}

}  // namespace fbmarb
