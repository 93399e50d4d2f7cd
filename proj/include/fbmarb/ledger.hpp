#pragma once

// Discretized execution of a continuous-time strategy with transaction costs.
//
// Column layout of a holdings row: 0 = risk-free asset, 1..d = risky assets,
// d+1 = transaction account. Row r (0-based) holds Phi_{r+1}; rows 0..N-1
// are the strategy sampled at t_0..t_{N-1}, row N is the liquidated state.
// The transaction account absorbs purchase costs, rebalancing costs and the
// net liquidation revenue; it pays no interest and may go negative.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "fbmarb/error.hpp"
#include "fbmarb/market.hpp"
#include "fbmarb/strategy.hpp"

namespace fbmarb {

/// Proportional rate stored as a fraction (0.001 for 0.1%) plus a minimum fee in currency.
struct CostSchedule {
    double proportional = 0.0;
    double minimum_fee = 0.0;

    static CostSchedule from_percent(double percent, double minimum_fee) {
        return CostSchedule{percent / 100.0, minimum_fee};
    }
    bool frictionless() const noexcept { return proportional == 0.0 && minimum_fee == 0.0; }
};

inline void validate(const CostSchedule& p) {
    if (!(p.proportional >= 0.0) || !(p.minimum_fee >= 0.0))
        throw DomainError("transaction cost parameters must be non-negative");
}

enum class TradePhase { purchase, rebalance, liquidate };

using HoldingsRow = std::vector<double>;

/// Risky-asset turnover at one trading date. `prices` is (S^0, S^1..S^d);
/// holdings rows carry at least d+1 entries, extra columns are ignored.
inline double trading_volume(std::span<const double> prev, std::span<const double> next,
                             std::span<const double> prices, TradePhase phase) {
    const std::size_t cols = prices.size();
    if (prev.size() < cols || next.size() < cols) throw DomainError("holdings row shorter than price row");
    double volume = 0.0;
    for (std::size_t i = 1; i < cols; ++i) {
        double shares = 0.0;
        switch (phase) {
            case TradePhase::purchase: shares = next[i]; break;
            case TradePhase::rebalance: shares = next[i] - prev[i]; break;
            case TradePhase::liquidate: shares = prev[i]; break;
        }
        volume += std::abs(shares) * prices[i];
    }
    return volume;
}

inline double transaction_cost(double volume, const CostSchedule& p) {
    if (!(volume >= 0.0)) throw DomainError("trading volume must be non-negative");
    return volume > 0.0 ? std::max(p.proportional * volume, p.minimum_fee) : 0.0;
}

/// Value change of the risk-free and risky holdings across a trade at fixed prices.
inline double rebalancing_cost(std::span<const double> prev, std::span<const double> next,
                               std::span<const double> prices) {
    const std::size_t cols = prices.size();
    if (prev.size() < cols || next.size() < cols) throw DomainError("holdings row shorter than price row");
    double cost = 0.0;
    for (std::size_t i = 0; i < cols; ++i) cost += (next[i] - prev[i]) * prices[i];
    return cost;
}

inline double net_liquidation_revenue(std::span<const double> final_holdings, std::span<const double> final_prices,
                                      const CostSchedule& p) {
    const std::size_t cols = final_prices.size();
    if (final_holdings.size() < cols) throw DomainError("holdings row shorter than price row");
    double gross = 0.0;
    for (std::size_t i = 0; i < cols; ++i) gross += final_holdings[i] * final_prices[i];
    return gross - transaction_cost(trading_volume(final_holdings, final_holdings, final_prices, TradePhase::liquidate), p);
}

namespace detail {

inline void check_dimension(const MarketScenario& scenario, const StrategySpec& spec) {
    if (std::holds_alternative<Shiryaev>(spec) && scenario.dimension() != 1)
        throw DomainError("Shiryaev strategy trades exactly one risky asset");
    if (std::holds_alternative<Salopek>(spec) && scenario.dimension() < 2)
        throw DomainError("Salopek strategy needs at least two risky assets");
    if (scenario.n_periods() < 1) throw DomainError("scenario has no trading periods");
}

/// (S^0, S^1..S^d) at t_n.
inline std::vector<double> full_price_row(const MarketScenario& scenario, std::size_t n) {
    std::vector<double> row(scenario.dimension() + 1);
    row[0] = MarketScenario::riskfree_price;
    for (std::size_t i = 0; i < scenario.dimension(); ++i) row[i + 1] = scenario.prices[i][n];
    return row;
}

}  // namespace detail

/// Continuous-time positions (psi^0..psi^d) at grid point n.
inline std::vector<double> continuous_positions(const MarketScenario& scenario, const StrategySpec& spec,
                                                std::size_t n) {
    std::vector<double> row(scenario.dimension() + 1, 0.0);
    if (const auto* s = std::get_if<Shiryaev>(&spec)) {
        const auto pos = shiryaev_positions(scenario.prices[0][0], scenario.prices[0][n], s->gamma);
        row[0] = pos.riskfree;
        row[1] = pos.risky;
    } else {
        const auto& sal = std::get<Salopek>(spec);
        const auto pos = salopek_positions(scenario.price_row(n), sal.alpha, sal.beta, sal.gamma);
        std::copy(pos.begin(), pos.end(), row.begin() + 1);
    }
    return row;
}

/// Closed-form continuous-time portfolio value at grid point n.
inline double continuous_value(const MarketScenario& scenario, const StrategySpec& spec, std::size_t n) {
    if (const auto* s = std::get_if<Shiryaev>(&spec))
        return shiryaev_value_continuous(scenario.prices[0][0], scenario.prices[0][n], s->gamma);
    const auto& sal = std::get<Salopek>(spec);
    return salopek_value_continuous(scenario.price_row(n), sal.alpha, sal.beta, sal.gamma);
}

/// Piecewise-constant holdings: row n-1 = Psi at t_{n-1} for n = 1..N, row N = 0.
inline std::vector<HoldingsRow> sample_strategy(const MarketScenario& scenario, const StrategySpec& spec) {
    detail::check_dimension(scenario, spec);
    validate(spec);
    const std::size_t n_periods = scenario.n_periods();
    std::vector<HoldingsRow> rows;
    rows.reserve(n_periods + 1);
    for (std::size_t n = 0; n < n_periods; ++n) rows.push_back(continuous_positions(scenario, spec, n));
    rows.emplace_back(scenario.dimension() + 1, 0.0);
    return rows;
}

struct TradeLedger {
    std::size_t dimension = 0;
    std::vector<HoldingsRow> holdings;       // N+1 rows of d+2 columns
    std::vector<double> volumes;             // Gamma at t_0..t_N
    std::vector<double> costs;               // L at t_0..t_N
    std::vector<double> rebalancing;         // D at t_0..t_N, zero at both ends
    double net_revenue = 0.0;                // R
    std::vector<double> values;              // V^Phi at t_0..t_N
    std::vector<double> continuous_values;   // V^Psi at t_0..t_N
    std::vector<double> running_min;         // m at t_0..t_N

    std::size_t n_periods() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    std::size_t account_column() const noexcept { return dimension + 1; }
    double terminal_value() const { return values.back(); }
};

inline std::vector<double> running_minimum(std::span<const double> values) {
    if (values.empty()) throw DomainError("running minimum of an empty series");
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t n = 1; n < out.size(); ++n) out[n] = std::min(out[n - 1], out[n]);
    return out;
}

inline TradeLedger run_discrete_strategy(const MarketScenario& scenario, const StrategySpec& spec,
                                         const CostSchedule& p) {
    validate(p);
    auto sampled = sample_strategy(scenario, spec);
    const std::size_t d = scenario.dimension();
    const std::size_t n_periods = scenario.n_periods();
    const std::size_t acct = d + 1;

    TradeLedger ledger;
    ledger.dimension = d;
    ledger.holdings.resize(n_periods + 1);
    for (std::size_t r = 0; r <= n_periods; ++r) {
        ledger.holdings[r] = std::move(sampled[r]);
        ledger.holdings[r].push_back(0.0);
    }
    ledger.volumes.assign(n_periods + 1, 0.0);
    ledger.costs.assign(n_periods + 1, 0.0);
    ledger.rebalancing.assign(n_periods + 1, 0.0);
    ledger.values.assign(n_periods + 1, 0.0);
    ledger.continuous_values.assign(n_periods + 1, 0.0);

    auto& h = ledger.holdings;

    // Purchase at t_0.
    auto prices = detail::full_price_row(scenario, 0);
    ledger.volumes[0] = trading_volume(h[0], h[0], prices, TradePhase::purchase);
    ledger.costs[0] = transaction_cost(ledger.volumes[0], p);
    h[0][acct] = -ledger.costs[0];

    // Rebalancing at t_1..t_{N-1}: Phi_n -> Phi_{n+1}.
    for (std::size_t n = 1; n < n_periods; ++n) {
        prices = detail::full_price_row(scenario, n);
        ledger.volumes[n] = trading_volume(h[n - 1], h[n], prices, TradePhase::rebalance);
        ledger.costs[n] = transaction_cost(ledger.volumes[n], p);
        ledger.rebalancing[n] = rebalancing_cost(h[n - 1], h[n], prices);
        h[n][acct] = h[n - 1][acct] - ledger.rebalancing[n] - ledger.costs[n];
    }

    // Liquidation at t_N.
    prices = detail::full_price_row(scenario, n_periods);
    ledger.volumes[n_periods] = trading_volume(h[n_periods - 1], h[n_periods], prices, TradePhase::liquidate);
    ledger.costs[n_periods] = transaction_cost(ledger.volumes[n_periods], p);
    ledger.net_revenue = net_liquidation_revenue(h[n_periods - 1], prices, p);
    h[n_periods][acct] = h[n_periods - 1][acct] + ledger.net_revenue;

    // V_{t_n} = sum_i Phi_{n+1}^i S_{t_n}^i with S^{d+1} = 1.
    for (std::size_t n = 0; n <= n_periods; ++n) {
        const auto row = detail::full_price_row(scenario, n);
        double v = h[n][acct];
        for (std::size_t i = 0; i <= d; ++i) v += h[n][i] * row[i];
        ledger.values[n] = v;
        ledger.continuous_values[n] = continuous_value(scenario, spec, n);
    }
    ledger.values[n_periods] = h[n_periods][acct];
    ledger.running_min = running_minimum(ledger.values);
    return ledger;
}

/// max_n |V_{t_n-} - L_{t_n} - V_{t_n}|, with V_{0-} = 0 (zero initial capital).
inline double verify_generalized_self_financing(const TradeLedger& ledger, const MarketScenario& scenario) {
    const std::size_t n_periods = ledger.n_periods();
    if (scenario.n_periods() != n_periods || scenario.dimension() != ledger.dimension)
        throw DomainError("ledger does not belong to this scenario");
    const std::size_t cols = ledger.dimension + 2;
    double worst = 0.0;
    for (std::size_t n = 0; n <= n_periods; ++n) {
        double before = 0.0;
        if (n > 0) {
            auto row = detail::full_price_row(scenario, n);
            row.push_back(1.0);
            for (std::size_t i = 0; i < cols; ++i) before += ledger.holdings[n - 1][i] * row[i];
        }
        worst = std::max(worst, std::abs(before - ledger.costs[n] - ledger.values[n]));
    }
    return worst;
}

}  // namespace fbmarb
