#pragma once

// Monte Carlo experiments and parameter sweeps.
//
// Scenario i always uses path index i, and every scenario writes into its
// own slot before statistics are reduced sequentially, so results do not
// depend on the number of worker threads. Sweep grid points share the same
// path indices (common random numbers).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fbmarb/error.hpp"
#include "fbmarb/ledger.hpp"
#include "fbmarb/market.hpp"
#include "fbmarb/strategy.hpp"

namespace fbmarb {

// ---------------------------------------------------------------- statistics

/// Linear interpolation between order statistics at h = q (n - 1).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> samples, double q) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, q);
}

/// Fraction of strictly negative samples.
inline double loss_probability(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("loss probability of an empty sample");
    const auto losses = std::count_if(samples.begin(), samples.end(), [](double x) { return x < 0.0; });
    return static_cast<double>(losses) / static_cast<double>(samples.size());
}

struct HistogramBin {
    double left;
    double right;
    std::size_t count;
};

/// Equal-width bins over [min, max]; the last bin is closed on the right.
inline std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t n_bins) {
    if (samples.empty()) throw DomainError("histogram of an empty sample");
    if (n_bins == 0) throw DomainError("histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / static_cast<double>(n_bins);
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].left = lo + width * static_cast<double>(b);
        bins[b].right = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
        bins[b].count = 0;
    }
    for (double x : samples) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((x - lo) / width) : 0;
        b = std::min(b, n_bins - 1);
        ++bins[b].count;
    }
    return bins;
}

struct SummaryStats {
    double mean = 0.0;
    double stdev = 0.0;  // n-1 denominator; 0 for a single sample
    double min = 0.0;
    double q05 = 0.0;
    double median = 0.0;
    double q95 = 0.0;
    double max = 0.0;
    double loss_probability = 0.0;
    std::size_t n_scenarios = 0;

    double standard_error() const {
        return n_scenarios > 0 ? stdev / std::sqrt(static_cast<double>(n_scenarios)) : 0.0;
    }
};

inline SummaryStats summarize(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("summary of an empty sample");
    SummaryStats s;
    s.n_scenarios = samples.size();
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples) sum += x;  // fixed order
    s.mean = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.stdev = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q05 = quantile_sorted(sorted, 0.05);
    s.median = quantile_sorted(sorted, 0.5);
    s.q95 = quantile_sorted(sorted, 0.95);
    s.loss_probability = loss_probability(samples);
    return s;
}

// ---------------------------------------------------------------- experiments

struct ScenarioOutcome {
    double terminal_discrete = 0.0;    // V_T^Phi
    double terminal_continuous = 0.0;  // V_T^Psi
    double running_min = 0.0;          // m_T
    double account_drain = 0.0;        // V_T^Psi - V_T^Phi
};

inline ScenarioOutcome outcome_of(const TradeLedger& ledger) {
    ScenarioOutcome o;
    o.terminal_discrete = ledger.values.back();
    o.terminal_continuous = ledger.continuous_values.back();
    o.running_min = ledger.running_min.back();
    o.account_drain = o.terminal_continuous - o.terminal_discrete;
    return o;
}

struct ExperimentConfig {
    MarketConfig market;
    StrategySpec strategy = Shiryaev{};
    CostSchedule costs;
    std::size_t n_scenarios = 100000;
    unsigned threads = 0;  // 0 = hardware concurrency; never changes results
};

struct ExperimentResult {
    std::vector<ScenarioOutcome> outcomes;
    SummaryStats terminal_discrete;
    SummaryStats terminal_continuous;
    SummaryStats running_min;
    SummaryStats account_drain;

    std::vector<double> field(double ScenarioOutcome::*member) const {
        std::vector<double> v(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i) v[i] = outcomes[i].*member;
        return v;
    }
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs `task(i)` for i in [0, count) on up to `threads` workers. The first exception is rethrown.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    constexpr std::size_t chunk = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= count) return;
                const std::size_t end = std::min(count, begin + chunk);
                try {
                    for (std::size_t i = begin; i < end; ++i) task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(count);
                    return;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

using ScenarioSource = std::function<MarketScenario(std::uint64_t path_index)>;

inline ExperimentResult collect(std::vector<ScenarioOutcome> outcomes) {
    ExperimentResult r;
    r.outcomes = std::move(outcomes);
    r.terminal_discrete = summarize(r.field(&ScenarioOutcome::terminal_discrete));
    r.terminal_continuous = summarize(r.field(&ScenarioOutcome::terminal_continuous));
    r.running_min = summarize(r.field(&ScenarioOutcome::running_min));
    r.account_drain = summarize(r.field(&ScenarioOutcome::account_drain));
    return r;
}

/// Experiment over an arbitrary scenario source (used by tests to inject degenerate markets).
inline ExperimentResult run_experiment(const ScenarioSource& source, const StrategySpec& spec, const CostSchedule& p,
                                       std::size_t n_scenarios, unsigned threads = 0) {
    if (n_scenarios == 0) throw DomainError("experiment needs at least one scenario");
    validate(spec);
    validate(p);
    std::vector<ScenarioOutcome> outcomes(n_scenarios);
    parallel_for(n_scenarios, threads, [&](std::size_t i) {
        outcomes[i] = outcome_of(run_discrete_strategy(source(i), spec, p));
    });
    return collect(std::move(outcomes));
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    const ScenarioSimulator simulator(config.market);
    return run_experiment([&](std::uint64_t i) { return simulator(i); }, config.strategy, config.costs,
                          config.n_scenarios, config.threads);
}

// ---------------------------------------------------------------- sweeps

/// Config fields a sweep can vary. Pair axes carry two values per point.
enum class SweepField { drift, volatility, hurst, initial_price, horizon, n_periods, gamma, p1, p2, costs, hurst_pair, alpha_beta };

inline SweepField parse_sweep_field(const std::string& name) {
    static const std::pair<const char*, SweepField> table[] = {
        {"mu", SweepField::drift},           {"sigma", SweepField::volatility},
        {"hurst", SweepField::hurst},        {"s0", SweepField::initial_price},
        {"horizon", SweepField::horizon},    {"n_periods", SweepField::n_periods},
        {"frequency", SweepField::n_periods}, {"gamma", SweepField::gamma},
        {"p1", SweepField::p1},              {"p2", SweepField::p2},
        {"costs", SweepField::costs},        {"hurst_pair", SweepField::hurst_pair},
        {"alpha_beta", SweepField::alpha_beta},
    };
    for (const auto& [key, field] : table)
        if (name == key) return field;
    throw ConfigError("sweep.axis", "unknown sweep field '" + name + "'");
}

inline std::string sweep_field_name(SweepField f) {
    switch (f) {
        case SweepField::drift: return "mu";
        case SweepField::volatility: return "sigma";
        case SweepField::hurst: return "hurst";
        case SweepField::initial_price: return "s0";
        case SweepField::horizon: return "horizon";
        case SweepField::n_periods: return "n_periods";
        case SweepField::gamma: return "gamma";
        case SweepField::p1: return "p1";
        case SweepField::p2: return "p2";
        case SweepField::costs: return "costs";
        case SweepField::hurst_pair: return "hurst_pair";
        case SweepField::alpha_beta: return "alpha_beta";
    }
    return "?";
}

inline bool is_pair_field(SweepField f) {
    return f == SweepField::costs || f == SweepField::hurst_pair || f == SweepField::alpha_beta;
}

struct SweepAxis {
    SweepField field = SweepField::hurst;
    std::vector<std::vector<double>> points;  // one value, or two for pair fields
};

/// All (a, b) with a <= b (or a < b when `strict`) from an ascending list.
inline std::vector<std::vector<double>> ordered_pairs(std::span<const double> values, bool strict) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i; j < v.size(); ++j)
            if (v[i] < v[j] || (!strict && v[i] == v[j])) out.push_back({v[i], v[j]});
    return out;
}

/// Applies one grid point. Cost values are in internal units (fraction, currency).
inline ExperimentConfig apply_sweep_point(ExperimentConfig config, SweepField field, std::span<const double> point) {
    const std::size_t need = is_pair_field(field) ? 2 : 1;
    if (point.size() != need) throw ConfigError("sweep.values", "wrong number of values per grid point");
    auto& assets = config.market.assets;
    switch (field) {
        case SweepField::drift: for (auto& a : assets) a.drift = point[0]; break;
        case SweepField::volatility: for (auto& a : assets) a.volatility = point[0]; break;
        case SweepField::hurst: for (auto& a : assets) a.hurst = point[0]; break;
        case SweepField::initial_price: for (auto& a : assets) a.initial_price = point[0]; break;
        case SweepField::horizon: {
            const double per_year = static_cast<double>(config.market.n_periods) / config.market.horizon;
            config.market.horizon = point[0];
            config.market.n_periods = static_cast<std::size_t>(std::llround(per_year * point[0]));
            break;
        }
        case SweepField::n_periods:
            if (!(point[0] >= 1.0) || point[0] != std::floor(point[0]))
                throw ConfigError("sweep.values", "trading periods must be a positive integer");
            config.market.n_periods = static_cast<std::size_t>(point[0]);
            break;
        case SweepField::gamma:
            std::visit([&](auto& s) { s.gamma = point[0]; }, config.strategy);
            break;
        case SweepField::p1: config.costs.proportional = point[0]; break;
        case SweepField::p2: config.costs.minimum_fee = point[0]; break;
        case SweepField::costs:
            config.costs.proportional = point[0];
            config.costs.minimum_fee = point[1];
            break;
        case SweepField::hurst_pair:
            if (assets.size() != 2) throw ConfigError("sweep.axis", "hurst_pair needs exactly two assets");
            assets[0].hurst = point[0];
            assets[1].hurst = point[1];
            break;
        case SweepField::alpha_beta: {
            auto* sal = std::get_if<Salopek>(&config.strategy);
            if (sal == nullptr) throw ConfigError("sweep.axis", "alpha_beta applies to the Salopek strategy only");
            sal->alpha = PowerOrder(point[0]);
            sal->beta = PowerOrder(point[1]);
            break;
        }
    }
    return config;
}

struct SweepRow {
    std::vector<double> point;
    ExperimentResult result;
};

/// One experiment per grid point, all with the base master seed.
inline std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepAxis& axis) {
    if (axis.points.empty()) throw ConfigError("sweep.values", "empty sweep grid");
    std::vector<SweepRow> rows;
    rows.reserve(axis.points.size());
    for (const auto& point : axis.points) {
        auto config = apply_sweep_point(base, axis.field, point);
        rows.push_back(SweepRow{point, run_experiment(config)});
    }
    return rows;
}

}  // namespace fbmarb
