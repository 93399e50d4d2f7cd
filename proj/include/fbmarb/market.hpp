#pragma once

// Fractional Black-Scholes market on an equidistant trading grid: one
// risk-free asset with constant price 1 and d geometric fBm risky assets
// S^i_t = s0^i exp(mu^i t + sigma^i B^{H^i}_t) driven by independent fBms.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbmarb/error.hpp"
#include "fbmarb/fbm.hpp"
#include "fbmarb/rng.hpp"

namespace fbmarb {

struct AssetParams {
    double drift = 0.05;
    double volatility = 0.1;
    double hurst = 0.6;
    double initial_price = 100.0;
};

struct MarketConfig {
    std::vector<AssetParams> assets{AssetParams{}};
    double horizon = 1.0;
    std::size_t n_periods = 250;
    std::uint64_t master_seed = 0;
    GeneratorKind generator = GeneratorKind::spectral;

    std::size_t dimension() const noexcept { return assets.size(); }
};

inline void validate(const AssetParams& a) {
    if (!(a.volatility > 0.0)) throw DomainError("volatility must be positive");
    if (!(a.initial_price > 0.0)) throw DomainError("initial price must be positive");
    if (!(a.hurst > 0.5 && a.hurst < 1.0)) throw DomainError("market Hurst exponent must lie in (0.5, 1)");
    if (!std::isfinite(a.drift)) throw DomainError("drift must be finite");
}

inline void validate(const MarketConfig& c) {
    if (c.assets.empty()) throw DomainError("market needs at least one risky asset");
    for (const auto& a : c.assets) validate(a);
    if (!(c.horizon > 0.0)) throw DomainError("horizon must be positive");
    if (c.n_periods < 2) throw DomainError("need at least 2 trading periods");
}

struct MarketScenario {
    std::vector<double> times;                    // t_0 ... t_N
    std::vector<std::vector<double>> prices;      // prices[i][n] = S^{i+1}_{t_n}
    std::vector<std::vector<double>> fbm_values;  // driving fBm per asset

    std::size_t dimension() const noexcept { return prices.size(); }
    std::size_t n_periods() const noexcept { return times.empty() ? 0 : times.size() - 1; }

    /// Risky prices at t_n.
    std::vector<double> price_row(std::size_t n) const {
        std::vector<double> row(prices.size());
        for (std::size_t i = 0; i < prices.size(); ++i) row[i] = prices[i][n];
        return row;
    }

    static constexpr double riskfree_price = 1.0;
};

/// Pointwise price formula applied to given fBm paths (one per asset, sampled on `times`).
inline MarketScenario prices_from_fbm(std::span<const AssetParams> assets, std::vector<double> times,
                                      std::vector<std::vector<double>> fbm_values) {
    if (fbm_values.size() != assets.size()) throw DomainError("one fBm path per asset required");
    MarketScenario sc;
    sc.times = std::move(times);
    sc.prices.resize(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& a = assets[i];
        if (fbm_values[i].size() != sc.times.size()) throw DomainError("fBm path length does not match grid");
        auto& row = sc.prices[i];
        row.resize(sc.times.size());
        for (std::size_t n = 0; n < sc.times.size(); ++n)
            row[n] = a.initial_price * std::exp(a.drift * sc.times[n] + a.volatility * fbm_values[i][n]);
        row[0] = a.initial_price;
    }
    sc.fbm_values = std::move(fbm_values);
    return sc;
}

/// Holds one fBm generator per asset so repeated scenarios reuse spectra and factorizations.
class ScenarioSimulator {
public:
    explicit ScenarioSimulator(MarketConfig config) : config_(std::move(config)) {
        validate(config_);
        samplers_.reserve(config_.assets.size());
        for (const auto& a : config_.assets)
            samplers_.emplace_back(config_.generator, a.hurst, config_.n_periods, config_.horizon);
    }

    const MarketConfig& config() const noexcept { return config_; }

    /// Asset i uses stream (master_seed, path_index, i), so adding assets leaves existing paths unchanged.
    MarketScenario operator()(std::uint64_t path_index) const {
        std::vector<std::vector<double>> fbm(config_.assets.size());
        std::vector<double> times;
        for (std::size_t i = 0; i < config_.assets.size(); ++i) {
            RandomStream rng(StreamKey{config_.master_seed, path_index, i, 0});
            auto p = samplers_[i].path(rng);
            fbm[i] = std::move(p.values);
            if (i == 0) times = std::move(p.times);
        }
        return prices_from_fbm(config_.assets, std::move(times), std::move(fbm));
    }

private:
    MarketConfig config_;
    std::vector<FbmSampler> samplers_;
};

inline MarketScenario simulate_scenario(const MarketConfig& config, std::uint64_t path_index) {
    return ScenarioSimulator(config)(path_index);
}

struct RescaledScenario {
    MarketScenario scenario;
    std::vector<double> scale_factors;
};

/// Rescales every asset to start at `target`; factor_i = target / S^i_0.
inline RescaledScenario rescale_to_common_start(const MarketScenario& scenario, double target) {
    if (!(target > 0.0)) throw DomainError("rescale target must be positive");
    RescaledScenario out{scenario, std::vector<double>(scenario.dimension())};
    for (std::size_t i = 0; i < scenario.dimension(); ++i) {
        const double f = target / scenario.prices[i].front();
        out.scale_factors[i] = f;
        for (auto& s : out.scenario.prices[i]) s *= f;
        out.scenario.prices[i].front() = target;
    }
    return out;
}

/// Positions in the rescaled market mapped back to original share counts.
inline std::vector<double> map_positions_to_original(std::span<const double> positions_rescaled,
                                                     std::span<const double> scale_factors) {
    if (positions_rescaled.size() != scale_factors.size())
        throw DomainError("positions and scale factors differ in length");
    std::vector<double> out(positions_rescaled.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale_factors[i] * positions_rescaled[i];
    return out;
}

/// Keeps every `stride`-th grid point (t_0, t_stride, ...). The grid length minus one must be divisible by stride.
inline MarketScenario subsample(const MarketScenario& scenario, std::size_t stride) {
    if (stride == 0 || scenario.n_periods() % stride != 0)
        throw DomainError("stride must divide the number of periods");
    MarketScenario out;
    const std::size_t n = scenario.n_periods() / stride;
    out.times.resize(n + 1);
    out.prices.assign(scenario.dimension(), std::vector<double>(n + 1));
    out.fbm_values.assign(scenario.fbm_values.size(), std::vector<double>(n + 1));
    for (std::size_t k = 0; k <= n; ++k) {
        out.times[k] = scenario.times[k * stride];
        for (std::size_t i = 0; i < scenario.dimension(); ++i) out.prices[i][k] = scenario.prices[i][k * stride];
        for (std::size_t i = 0; i < scenario.fbm_values.size(); ++i)
            out.fbm_values[i][k] = scenario.fbm_values[i][k * stride];
    }
    return out;
}

}  // namespace fbmarb
