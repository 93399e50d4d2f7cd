#pragma once

// File emission for the `fbmarb` subcommands: paths, replay, run, sweep.
//
// CSV: header row, comma separator, LF endings, shortest round-trip decimals.
// Each CSV starts with "# key = value" provenance lines holding the resolved
// configuration; JSON documents carry it under "config". Either kind of
// output file can be passed back as --config to reproduce it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmarb/config.hpp"
#include "fbmarb/error.hpp"
#include "fbmarb/ledger.hpp"
#include "fbmarb/market.hpp"
#include "fbmarb/montecarlo.hpp"

namespace fbmarb {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Config text, a CSV written by this tool, or a JSON document written by this tool.
inline ConfigValues load_config_file(const fs::path& path) {
    const std::string text = read_file(path);
    if (path.extension() == ".json") {
        const auto doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.contains("config") || !doc["config"].is_object())
            throw ConfigError("config", "'" + path.string() + "' has no config object");
        ConfigValues values;
        for (const auto& [key, value] : doc["config"].items()) values[key] = value.get<std::string>();
        return values;
    }
    if (path.extension() == ".csv") {
        std::string config;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line) && line.rfind("# ", 0) == 0) config += line.substr(2) + "\n";
        return parse_config_text(config);
    }
    return parse_config_text(text);
}

namespace detail {

inline std::ofstream open_output(const fs::path& path) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

inline void write_provenance(std::ostream& out, const RunConfig& rc) { out << to_config_text(rc.resolved, "# "); }

inline void write_row(std::ostream& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
}

inline nlohmann::json stats_json(const SummaryStats& s) {
    return {{"mean", s.mean},   {"stdev", s.stdev}, {"min", s.min}, {"q05", s.q05},
            {"median", s.median}, {"q95", s.q95},   {"max", s.max}, {"loss_probability", s.loss_probability},
            {"n_scenarios", s.n_scenarios}};
}

inline nlohmann::json config_json(const RunConfig& rc) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : rc.resolved) j[k] = v;
    return j;
}

}  // namespace detail

inline void write_path_csv(std::ostream& out, const GaussianPath& path) {
    out << "t,value\n";
    for (std::size_t n = 0; n < path.values.size(); ++n) detail::write_row(out, {path.times[n], path.values[n]});
}

inline void write_prices_csv(std::ostream& out, const MarketScenario& sc) {
    out << "t";
    for (std::size_t i = 1; i <= sc.dimension(); ++i) out << ",S" << i;
    out << '\n';
    for (std::size_t n = 0; n < sc.times.size(); ++n) {
        std::vector<double> row{sc.times[n]};
        for (std::size_t i = 0; i < sc.dimension(); ++i) row.push_back(sc.prices[i][n]);
        detail::write_row(out, row);
    }
}

/// One row per trading date t_n; Phi columns hold Phi_{n+1}, the holdings after trading at t_n.
inline void write_ledger_csv(std::ostream& out, const TradeLedger& ledger, const MarketScenario& sc) {
    const std::size_t d = ledger.dimension;
    out << "n,t";
    for (std::size_t i = 1; i <= d; ++i) out << ",S" << i;
    for (std::size_t i = 0; i <= d + 1; ++i) out << ",Phi" << i;
    out << ",Gamma,L,D,V_Phi,V_Psi,m\n";
    for (std::size_t n = 0; n <= ledger.n_periods(); ++n) {
        std::vector<double> row{static_cast<double>(n), sc.times[n]};
        for (std::size_t i = 0; i < d; ++i) row.push_back(sc.prices[i][n]);
        for (double h : ledger.holdings[n]) row.push_back(h);
        row.insert(row.end(), {ledger.volumes[n], ledger.costs[n], ledger.rebalancing[n], ledger.values[n],
                               ledger.continuous_values[n], ledger.running_min[n]});
        detail::write_row(out, row);
    }
}

inline void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
    out << "bin_left,bin_right,count\n";
    for (const auto& b : bins) out << format_double(b.left) << ',' << format_double(b.right) << ',' << b.count << '\n';
}

/// `count` scenarios; fBm CSVs (t,value) per asset and/or price CSVs (t,S1..Sd).
inline std::vector<fs::path> cmd_paths(const RunConfig& rc, std::size_t count, bool fbm, bool prices) {
    std::vector<fs::path> written;
    if (count == 0) return written;
    const ScenarioSimulator simulator(rc.experiment.market);
    for (std::size_t k = 0; k < count; ++k) {
        const auto sc = simulator(k);
        if (fbm) {
            for (std::size_t i = 0; i < sc.dimension(); ++i) {
                const auto path = rc.output / ("fbm_" + std::to_string(k) + "_asset" + std::to_string(i + 1) + ".csv");
                auto out = detail::open_output(path);
                detail::write_provenance(out, rc);
                write_path_csv(out, GaussianPath{sc.times, sc.fbm_values[i]});
                written.push_back(path);
            }
        }
        if (prices) {
            const auto path = rc.output / ("prices_" + std::to_string(k) + ".csv");
            auto out = detail::open_output(path);
            detail::write_provenance(out, rc);
            write_prices_csv(out, sc);
            written.push_back(path);
        }
    }
    return written;
}

inline fs::path cmd_replay(const RunConfig& rc, std::size_t scenario_index) {
    if (scenario_index >= rc.experiment.n_scenarios)
        throw ConfigError("index", "scenario index " + std::to_string(scenario_index) + " is not below n_scenarios = " +
                                       std::to_string(rc.experiment.n_scenarios));
    const auto sc = simulate_scenario(rc.experiment.market, scenario_index);
    const auto ledger = run_discrete_strategy(sc, rc.experiment.strategy, rc.experiment.costs);
    const auto path = rc.output / ("ledger_" + std::to_string(scenario_index) + ".csv");
    auto out = detail::open_output(path);
    detail::write_provenance(out, rc);
    write_ledger_csv(out, ledger, sc);
    return path;
}

struct RunOutput {
    ExperimentResult result;
    std::vector<fs::path> files;
};

/// Full experiment: stats.json plus one histogram CSV per outcome field.
inline RunOutput cmd_run(const RunConfig& rc, bool write_outcomes = false) {
    RunOutput ro;
    ro.result = run_experiment(rc.experiment);
    const auto& r = ro.result;

    struct Field {
        const char* name;
        double ScenarioOutcome::*member;
        const SummaryStats* stats;
    };
    const Field fields[] = {
        {"terminal_discrete", &ScenarioOutcome::terminal_discrete, &r.terminal_discrete},
        {"terminal_continuous", &ScenarioOutcome::terminal_continuous, &r.terminal_continuous},
        {"running_min", &ScenarioOutcome::running_min, &r.running_min},
        {"account_drain", &ScenarioOutcome::account_drain, &r.account_drain},
    };

    nlohmann::json doc;
    doc["config"] = detail::config_json(rc);
    doc["strategy"] = strategy_name(rc.experiment.strategy);
    for (const auto& f : fields) doc["stats"][f.name] = detail::stats_json(*f.stats);

    const auto stats_path = rc.output / "stats.json";
    {
        auto out = detail::open_output(stats_path);
        out << doc.dump(2) << '\n';
    }
    ro.files.push_back(stats_path);

    for (const auto& f : fields) {
        const auto path = rc.output / ("hist_" + std::string(f.name) + ".csv");
        auto out = detail::open_output(path);
        detail::write_provenance(out, rc);
        write_histogram_csv(out, histogram(r.field(f.member), rc.histogram_bins));
        ro.files.push_back(path);
    }

    if (write_outcomes) {
        const auto path = rc.output / "outcomes.csv";
        auto out = detail::open_output(path);
        detail::write_provenance(out, rc);
        out << "scenario,V_T_Phi,V_T_Psi,m_T,drain\n";
        for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
            const auto& o = r.outcomes[i];
            detail::write_row(out, {static_cast<double>(i), o.terminal_discrete, o.terminal_continuous, o.running_min,
                                    o.account_drain});
        }
        ro.files.push_back(path);
    }
    return ro;
}

struct SweepOutput {
    std::vector<SweepRow> rows;
    std::vector<fs::path> files;
};

/// One row per grid point: sweep.csv and sweep.json.
inline SweepOutput cmd_sweep(const RunConfig& rc) {
    if (!rc.sweep) throw ConfigError("sweep.axis", "the sweep subcommand needs a [sweep] axis");
    const auto& spec = *rc.sweep;
    auto base = rc.experiment;
    base.n_scenarios = spec.n_scenarios;

    SweepOutput so;
    so.rows = sweep(base, spec.axis);

    std::vector<std::string> keys;
    switch (spec.field) {
        case SweepField::costs: keys = {"p1", "p2"}; break;
        case SweepField::hurst_pair: keys = {"H1", "H2"}; break;
        case SweepField::alpha_beta: keys = {"alpha", "beta"}; break;
        default: keys = {sweep_field_name(spec.field)}; break;
    }
    // Report cost axes in the configured (percent) unit.
    auto display = [&](const std::vector<double>& point) {
        auto p = point;
        if (spec.field == SweepField::p1 || spec.field == SweepField::costs) p[0] *= 100.0;
        return p;
    };

    const auto csv_path = rc.output / "sweep.csv";
    {
        auto out = detail::open_output(csv_path);
        detail::write_provenance(out, rc);
        for (const auto& k : keys) out << k << ',';
        out << "n_periods,mean,stdev,min,q05,median,q95,max,loss_probability,mean_continuous,mean_running_min,"
               "mean_drain\n";
        for (const auto& row : so.rows) {
            const auto cfg = apply_sweep_point(base, spec.field, row.point);
            const auto& s = row.result.terminal_discrete;
            auto values = display(row.point);
            values.insert(values.end(),
                          {static_cast<double>(cfg.market.n_periods), s.mean, s.stdev, s.min, s.q05, s.median, s.q95,
                           s.max, s.loss_probability, row.result.terminal_continuous.mean, row.result.running_min.mean,
                           row.result.account_drain.mean});
            detail::write_row(out, values);
        }
    }
    so.files.push_back(csv_path);

    nlohmann::json doc;
    doc["config"] = detail::config_json(rc);
    doc["axis"] = sweep_field_name(spec.field);
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : so.rows) {
        nlohmann::json j;
        std::vector<std::string> point;
        for (double v : display(row.point)) point.push_back(format_double(v));
        j["point"] = point;
        j["terminal_discrete"] = detail::stats_json(row.result.terminal_discrete);
        j["terminal_continuous"] = detail::stats_json(row.result.terminal_continuous);
        j["running_min"] = detail::stats_json(row.result.running_min);
        j["account_drain"] = detail::stats_json(row.result.account_drain);
        doc["rows"].push_back(std::move(j));
    }
    const auto json_path = rc.output / "sweep.json";
    {
        auto out = detail::open_output(json_path);
        out << doc.dump(2) << '\n';
    }
    so.files.push_back(json_path);
    return so;
}

}  // namespace fbmarb
