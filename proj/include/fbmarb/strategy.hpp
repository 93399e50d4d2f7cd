#pragma once

// Continuous-time arbitrage rules and their closed-form values.
//
// Shiryaev (one risky asset, plus the risk-free asset):
//   psi0 = gamma (s0^2 - S^2) / s0,  psi1 = 2 gamma (S - s0) / s0,
//   V    = gamma (S - s0)^2 / s0.
// Salopek (d >= 2 risky assets, equal starting prices):
//   hat_i(a) = (1/d) (S^i / M_a(S))^(a-1),  psi = gamma (hat(beta) - hat(alpha)),
//   V        = gamma (M_beta(S) - M_alpha(S)),
// with M_a the a-order power mean.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fbmarb/error.hpp"

namespace fbmarb {

/// Power-mean order: a finite real or one of the two infinities.
class PowerOrder {
public:
    enum class Kind { finite, plus_infinity, minus_infinity };

    constexpr PowerOrder() = default;
    constexpr PowerOrder(double value) : kind_(classify(value)), value_(value) {}  // NOLINT: implicit on purpose

    static constexpr PowerOrder plus_infinity() { return PowerOrder(std::numeric_limits<double>::infinity()); }
    static constexpr PowerOrder minus_infinity() { return PowerOrder(-std::numeric_limits<double>::infinity()); }

    constexpr Kind kind() const noexcept { return kind_; }
    constexpr bool is_finite() const noexcept { return kind_ == Kind::finite; }
    /// Position on the extended real line; +-infinity for the infinite kinds.
    constexpr double value() const noexcept { return value_; }

    friend constexpr bool operator<(PowerOrder a, PowerOrder b) noexcept { return a.value_ < b.value_; }
    friend constexpr bool operator==(PowerOrder a, PowerOrder b) noexcept { return a.value_ == b.value_; }

private:
    static constexpr Kind classify(double v) {
        if (v == std::numeric_limits<double>::infinity()) return Kind::plus_infinity;
        if (v == -std::numeric_limits<double>::infinity()) return Kind::minus_infinity;
        if (v != v) throw DomainError("power order must not be NaN");
        return Kind::finite;
    }

    Kind kind_ = Kind::finite;
    double value_ = 1.0;
};

inline std::string to_string(PowerOrder a) {
    switch (a.kind()) {
        case PowerOrder::Kind::plus_infinity: return "inf";
        case PowerOrder::Kind::minus_infinity: return "-inf";
        default: break;
    }
    auto s = std::to_string(a.value());
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

namespace detail {

inline void check_positive(std::span<const double> x) {
    if (x.empty()) throw DomainError("power mean of an empty vector");
    for (double v : x)
        if (!(v > 0.0)) throw DomainError("power mean requires strictly positive entries");
}

}  // namespace detail

/// a-order power mean. Finite orders factor out max(x) (a > 0) or min(x)
/// (a < 0) so every powered ratio lies in (0, 1]; a = 0 is the geometric
/// mean evaluated in log space.
inline double power_mean(std::span<const double> x, PowerOrder a) {
    detail::check_positive(x);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    switch (a.kind()) {
        case PowerOrder::Kind::plus_infinity: return *hi;
        case PowerOrder::Kind::minus_infinity: return *lo;
        case PowerOrder::Kind::finite: break;
    }
    const double d = static_cast<double>(x.size());
    const double order = a.value();
    if (order == 0.0) {
        double s = 0.0;
        for (double v : x) s += std::log(v);
        return std::exp(s / d);
    }
    const double pivot = order > 0.0 ? *hi : *lo;
    double s = 0.0;
    for (double v : x) s += std::pow(v / pivot, order);
    return pivot * std::pow(s / d, 1.0 / order);
}

struct ShiryaevPositions {
    double riskfree;
    double risky;
};

inline ShiryaevPositions shiryaev_positions(double s0, double s_t, double gamma) {
    if (!(s0 > 0.0 && s_t > 0.0)) throw DomainError("prices must be positive");
    return {gamma * (s0 - s_t) * (s0 + s_t) / s0, 2.0 * gamma * (s_t - s0) / s0};
}

inline double shiryaev_value_continuous(double s0, double s_t, double gamma) {
    if (!(s0 > 0.0 && s_t > 0.0)) throw DomainError("prices must be positive");
    const double diff = s_t - s0;
    return gamma * diff * diff / s0;
}

/// Shares of the a-strategy; for infinite orders 1/m on each of the m extremal assets.
inline std::vector<double> salopek_hat_positions(std::span<const double> s_t, PowerOrder a) {
    if (s_t.size() < 2) throw DomainError("Salopek strategy needs at least two risky assets");
    detail::check_positive(s_t);
    const std::size_t d = s_t.size();
    std::vector<double> hat(d, 0.0);
    if (!a.is_finite()) {
        const double extreme = a.kind() == PowerOrder::Kind::plus_infinity
                                   ? *std::max_element(s_t.begin(), s_t.end())
                                   : *std::min_element(s_t.begin(), s_t.end());
        const auto ties = static_cast<double>(std::count(s_t.begin(), s_t.end(), extreme));
        for (std::size_t i = 0; i < d; ++i)
            if (s_t[i] == extreme) hat[i] = 1.0 / ties;
        return hat;
    }
    const double mean = power_mean(s_t, a);
    const double exponent = a.value() - 1.0;
    for (std::size_t i = 0; i < d; ++i) hat[i] = std::pow(s_t[i] / mean, exponent) / static_cast<double>(d);
    return hat;
}

inline void check_orders(PowerOrder alpha, PowerOrder beta) {
    if (!(alpha < beta)) throw DomainError("Salopek orders require alpha < beta");
}

inline std::vector<double> salopek_positions(std::span<const double> s_t, PowerOrder alpha, PowerOrder beta,
                                             double gamma) {
    check_orders(alpha, beta);
    auto pos = salopek_hat_positions(s_t, beta);
    const auto short_leg = salopek_hat_positions(s_t, alpha);
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = gamma * (pos[i] - short_leg[i]);
    return pos;
}

inline double salopek_value_continuous(std::span<const double> s_t, PowerOrder alpha, PowerOrder beta,
                                       double gamma) {
    check_orders(alpha, beta);
    return gamma * (power_mean(s_t, beta) - power_mean(s_t, alpha));
}

struct Shiryaev {
    double gamma = 100.0;
};

struct Salopek {
    PowerOrder alpha = PowerOrder(-30.0);
    PowerOrder beta = PowerOrder(30.0);
    double gamma = 100.0;
};

using StrategySpec = std::variant<Shiryaev, Salopek>;

inline double scaling_factor(const StrategySpec& spec) {
    return std::visit([](const auto& s) { return s.gamma; }, spec);
}

inline void validate(const StrategySpec& spec) {
    if (!(scaling_factor(spec) > 0.0)) throw DomainError("scaling factor gamma must be positive");
    if (const auto* s = std::get_if<Salopek>(&spec)) check_orders(s->alpha, s->beta);
}

inline std::string strategy_name(const StrategySpec& spec) {
    return std::holds_alternative<Shiryaev>(spec) ? "shiryaev" : "salopek";
}

}  // namespace fbmarb
