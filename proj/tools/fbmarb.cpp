// fbmarb: simulate fBm markets and discretized arbitrage strategies.
//
//   fbmarb run    [--config FILE] [--KEY VALUE ...]
//   fbmarb sweep  --axis hurst [--values "0.51,0.6"] ...
//   fbmarb replay --index 7 ...
//   fbmarb paths  --count 3 [--prices] [--fbm] ...

#include <cstddef>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fbmarb/cli.hpp"

namespace {

struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    std::vector<std::string> assignments;  // --set key=value
};

void add_config_flags(CLI::App& cmd, ConfigFlags& flags) {
    cmd.add_option("--config", flags.config_file, "Config file, or an output file of an earlier run");
    for (const auto& key : fbmarb::known_config_keys())
        cmd.add_option("--" + key, flags.values[key], "Config key '" + key + "'");
    cmd.add_option("--axis", flags.values["sweep.axis"], "Sweep axis (mu, sigma, hurst, s0, horizon, frequency, "
                                                         "gamma, p1, p2, costs, hurst_pair, alpha_beta)");
    cmd.add_option("--values", flags.values["sweep.values"], "Sweep grid, comma separated");
    cmd.add_option("--sweep-scenarios", flags.values["sweep.n_scenarios"], "Scenarios per sweep grid point");
    cmd.add_option("--set", flags.assignments, "Any config key as key=value, e.g. asset.2.hurst=0.7");
}

// Flags override file values.
fbmarb::RunConfig build_config(const CLI::App& cmd, const ConfigFlags& flags) {
    fbmarb::ConfigValues values;
    if (!flags.config_file.empty()) values = fbmarb::load_config_file(flags.config_file);
    for (const auto& assignment : flags.assignments) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw fbmarb::ConfigError(assignment, "--set expects key=value");
        values[assignment.substr(0, eq)] = assignment.substr(eq + 1);
    }
    for (const auto& [key, value] : flags.values) {
        std::string flag = key == "sweep.axis" ? "--axis" : key == "sweep.values" ? "--values"
                         : key == "sweep.n_scenarios" ? "--sweep-scenarios" : "--" + key;
        if (cmd.count(flag) > 0) values[key] = value;
    }
    return fbmarb::resolve_config(values);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo simulator for discretized fBm arbitrage strategies"};
    app.require_subcommand(1);

    ConfigFlags run_flags, sweep_flags, replay_flags, paths_flags;

    auto* run = app.add_subcommand("run", "Full experiment: stats JSON and histogram CSVs");
    add_config_flags(*run, run_flags);
    bool outcomes = false;
    run->add_flag("--outcomes", outcomes, "Also write per-scenario outcomes.csv");

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep: one row per grid point");
    add_config_flags(*sweep, sweep_flags);

    auto* replay = app.add_subcommand("replay", "Write the full trade ledger of one scenario");
    add_config_flags(*replay, replay_flags);
    std::size_t index = 0;
    replay->add_option("--index", index, "Scenario index")->required();

    auto* paths = app.add_subcommand("paths", "Write fBm and/or price paths");
    add_config_flags(*paths, paths_flags);
    std::size_t count = 1;
    bool prices = false;
    bool fbm = false;
    paths->add_option("--count", count, "Number of scenarios");
    paths->add_flag("--prices", prices, "Write price paths");
    paths->add_flag("--fbm", fbm, "Write fBm paths (default when --prices is absent)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto rc = build_config(*run, run_flags);
            const auto out = fbmarb::cmd_run(rc, outcomes);
            const auto& s = out.result.terminal_discrete;
            std::cout << "mean V_T = " << s.mean << ", loss probability = " << s.loss_probability << '\n';
            for (const auto& f : out.files) std::cout << f.string() << '\n';
        } else if (sweep->parsed()) {
            const auto rc = build_config(*sweep, sweep_flags);
            for (const auto& f : fbmarb::cmd_sweep(rc).files) std::cout << f.string() << '\n';
        } else if (replay->parsed()) {
            const auto rc = build_config(*replay, replay_flags);
            std::cout << fbmarb::cmd_replay(rc, index).string() << '\n';
        } else if (paths->parsed()) {
            const auto rc = build_config(*paths, paths_flags);
            for (const auto& f : fbmarb::cmd_paths(rc, count, fbm || !prices, prices)) std::cout << f.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
