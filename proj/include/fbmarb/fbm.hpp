#pragma once

// Discrete fractional Brownian motion.
//
// SpectralFbm synthesizes stationary unit-variance increments from the
// power spectral density of fractional Gaussian noise truncated to lags in
// [-M/2, M/2), M even, using random phases:
//
//   W_k = sqrt(2/M) sum_{j=-M/2}^{M/2-1} sqrt(S(j/M)) cos(2 pi j k / M + phi_j)
//
// and accumulates them with the self-similarity factor (T/N)^H. ExactFbm is
// the covariance-exact reference generator (dense Cholesky factor of the fBm
// Gram matrix), kept public so the two can be compared.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <fftw3.h>

#include "fbmarb/error.hpp"
#include "fbmarb/rng.hpp"

namespace fbmarb {

namespace detail {

inline void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw DomainError("Hurst exponent must lie in (0, 1), got " + std::to_string(hurst));
}

inline double pow_abs(double x, double e) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), e); }

// FFTW planning is not thread-safe; execution on caller-owned buffers is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class BackwardDft {
public:
    explicit BackwardDft(std::size_t n) : n_(n) {
        std::vector<std::complex<double>> in(n), out(n);
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan_ == nullptr) throw NumericError("FFTW could not plan a transform", n);
    }
    BackwardDft(const BackwardDft&) = delete;
    BackwardDft& operator=(const BackwardDft&) = delete;
    ~BackwardDft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }

    std::size_t size() const noexcept { return n_; }

    // out[k] = sum_j in[j] exp(+2 pi i j k / n)
    void execute(std::span<std::complex<double>> in, std::span<std::complex<double>> out) const {
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

private:
    std::size_t n_;
    fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Cov(B_t, B_s) = (|t|^2H + |s|^2H - |t-s|^2H) / 2.
inline double fbm_covariance(double t, double s, double hurst) {
    detail::check_hurst(hurst);
    const double e = 2.0 * hurst;
    return 0.5 * (detail::pow_abs(t, e) + detail::pow_abs(s, e) - detail::pow_abs(t - s, e));
}

/// Autocovariance of unit-step fBm increments (fractional Gaussian noise).
inline double increment_autocovariance(long lag, double hurst) {
    detail::check_hurst(hurst);
    const double e = 2.0 * hurst;
    const double m = static_cast<double>(lag);
    return 0.5 * (detail::pow_abs(m + 1.0, e) + detail::pow_abs(m - 1.0, e) - 2.0 * detail::pow_abs(m, e));
}

/// Spectral density of fractional Gaussian noise with lags truncated to [-n/2, n/2).
/// May be slightly negative; callers clamp before taking square roots.
inline double spectral_density_truncated(double freq, double hurst, long n) {
    detail::check_hurst(hurst);
    if (n <= 0 || n % 2 != 0) throw DomainError("spectral density needs a positive even length, got " + std::to_string(n));
    if (!(std::abs(freq) <= 0.5)) throw DomainError("frequency must lie in [-1/2, 1/2]");
    double sum = 0.0;
    for (long m = -n / 2; m < n / 2; ++m)
        sum += increment_autocovariance(m, hurst) * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) * freq);
    return sum;
}

struct GaussianPath {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t n_steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Partial sums of `increments` scaled by (T/N)^H on the grid t_n = nT/N.
inline GaussianPath assemble_fbm_path(std::span<const double> increments, double horizon, double hurst) {
    if (increments.empty()) throw DomainError("cannot assemble a path from zero increments");
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    detail::check_hurst(hurst);
    const std::size_t n = increments.size();
    const double dt = horizon / static_cast<double>(n);
    const double scale = std::pow(dt, hurst);

    GaussianPath path;
    path.times.resize(n + 1);
    path.values.resize(n + 1);
    path.times[0] = 0.0;
    path.values[0] = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sum += increments[k];
        path.times[k + 1] = horizon * static_cast<double>(k + 1) / static_cast<double>(n);
        path.values[k + 1] = scale * sum;
    }
    path.times[n] = horizon;
    return path;
}

struct SpectralDiagnostics {
    std::size_t clamped_frequencies = 0;
    double most_negative_density = 0.0;  // 0 when nothing was clamped
};

/// Random-phase spectral generator for a fixed (H, N). Immutable after
/// construction; `increments` may be called concurrently.
class SpectralFbm {
public:
    SpectralFbm(double hurst, std::size_t n_steps) : hurst_(hurst), n_steps_(n_steps) {
        detail::check_hurst(hurst);
        if (n_steps < 2) throw DomainError("fBm needs at least 2 steps");
        // Odd requests are served from the next even size; the last increment is dropped.
        m_ = n_steps % 2 == 0 ? n_steps : n_steps + 1;
        const long m = static_cast<long>(m_);

        std::vector<double> autocov(m_);
        for (long lag = -m / 2; lag < m / 2; ++lag) autocov[lag + m / 2] = increment_autocovariance(lag, hurst);

        const double norm = std::sqrt(2.0 / static_cast<double>(m_));
        amplitude_.resize(m_);
        for (long j = -m / 2; j < m / 2; ++j) {
            double s = 0.0;
            for (long lag = -m / 2; lag < m / 2; ++lag)
                s += autocov[lag + m / 2] *
                     std::cos(2.0 * std::numbers::pi * static_cast<double>(lag * j % m) / static_cast<double>(m));
            if (s < 0.0) {
                ++diagnostics_.clamped_frequencies;
                diagnostics_.most_negative_density = std::min(diagnostics_.most_negative_density, s);
                s = 0.0;
            }
            amplitude_[j + m / 2] = norm * std::sqrt(s);
        }
        dft_ = std::make_shared<detail::BackwardDft>(m_);
    }

    double hurst() const noexcept { return hurst_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t transform_size() const noexcept { return m_; }
    const SpectralDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    /// Draws phi_j for j = -M/2 ... M/2-1 in that order.
    std::vector<double> draw_phases(RandomStream& rng) const {
        std::vector<double> phases(m_);
        for (auto& p : phases) p = 2.0 * std::numbers::pi * rng.uniform();
        return phases;
    }

    /// FFT evaluation of the phase sum. Returns n_steps increments.
    std::vector<double> increments_from_phases(std::span<const double> phases) const {
        check_phases(phases);
        const long m = static_cast<long>(m_);
        std::vector<std::complex<double>> in(m_), out(m_);
        for (long j = -m / 2; j < m / 2; ++j) {
            const std::size_t slot = static_cast<std::size_t>((j + m) % m);
            in[slot] = std::polar(amplitude_[j + m / 2], phases[j + m / 2]);
        }
        dft_->execute(in, out);
        std::vector<double> w(n_steps_);
        for (std::size_t k = 0; k < n_steps_; ++k) w[k] = out[k].real();
        return w;
    }

    /// Direct O(M^2) evaluation of the same sum; reference for the FFT path.
    std::vector<double> increments_direct(std::span<const double> phases) const {
        check_phases(phases);
        const long m = static_cast<long>(m_);
        std::vector<double> w(n_steps_);
        for (std::size_t k = 0; k < n_steps_; ++k) {
            double sum = 0.0;
            for (long j = -m / 2; j < m / 2; ++j) {
                const double theta = 2.0 * std::numbers::pi * static_cast<double>((j * static_cast<long>(k)) % m) /
                                     static_cast<double>(m);
                const double phi = phases[j + m / 2];
                sum += amplitude_[j + m / 2] * (std::cos(theta) * std::cos(phi) - std::sin(theta) * std::sin(phi));
            }
            w[k] = sum;
        }
        return w;
    }

    std::vector<double> increments(RandomStream& rng) const { return increments_from_phases(draw_phases(rng)); }

    GaussianPath path(double horizon, RandomStream& rng) const {
        return assemble_fbm_path(increments(rng), horizon, hurst_);
    }

private:
    void check_phases(std::span<const double> phases) const {
        if (phases.size() != m_) throw DomainError("expected " + std::to_string(m_) + " phases");
    }

    double hurst_;
    std::size_t n_steps_;
    std::size_t m_ = 0;
    std::vector<double> amplitude_;  // sqrt(2/M) * sqrt(max(S(j/M), 0)), j ascending from -M/2
    SpectralDiagnostics diagnostics_;
    std::shared_ptr<const detail::BackwardDft> dft_;
};

/// Increments W_0 ... W_{n-1} from the spectral method.
inline std::vector<double> generate_increments_spectral(double hurst, std::size_t n, RandomStream& rng) {
    if (n == 0 || n % 2 != 0) throw DomainError("spectral increments need a positive even count, got " + std::to_string(n));
    return SpectralFbm(hurst, n).increments(rng);
}

/// Exact-covariance generator: B = L z with L the lower Cholesky factor of
/// Cov(B_{t_i}, B_{t_j}), i, j = 1..N.
class ExactFbm {
public:
    static constexpr std::size_t max_steps = 2048;

    ExactFbm(double hurst, std::size_t n_steps, double horizon)
        : hurst_(hurst), n_(n_steps), horizon_(horizon) {
        detail::check_hurst(hurst);
        if (n_steps < 1) throw DomainError("fBm needs at least 1 step");
        if (n_steps > max_steps) throw DomainError("exact generator limited to " + std::to_string(max_steps) + " steps");
        if (!(horizon > 0.0)) throw DomainError("horizon must be positive");

        times_.resize(n_ + 1);
        for (std::size_t i = 0; i <= n_; ++i) times_[i] = horizon * static_cast<double>(i) / static_cast<double>(n_);
        times_[n_] = horizon;

        factor_.assign(n_ * (n_ + 1) / 2, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = fbm_covariance(times_[i + 1], times_[j + 1], hurst);
                for (std::size_t k = 0; k < j; ++k) sum -= at(i, k) * at(j, k);
                if (i == j) {
                    if (!(sum > 0.0)) throw NumericError("covariance matrix is not positive definite", i);
                    at(i, i) = std::sqrt(sum);
                } else {
                    at(i, j) = sum / at(j, j);
                }
            }
        }
    }

    double hurst() const noexcept { return hurst_; }
    std::size_t n_steps() const noexcept { return n_; }
    double horizon() const noexcept { return horizon_; }

    GaussianPath path(RandomStream& rng) const {
        std::vector<double> z(n_);
        for (auto& v : z) v = rng.normal();
        GaussianPath p;
        p.times = times_;
        p.values.assign(n_ + 1, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = &factor_[i * (i + 1) / 2];
            double sum = 0.0;
            for (std::size_t k = 0; k <= i; ++k) sum += row[k] * z[k];
            p.values[i + 1] = sum;
        }
        return p;
    }

private:
    double& at(std::size_t i, std::size_t j) { return factor_[i * (i + 1) / 2 + j]; }

    double hurst_;
    std::size_t n_;
    double horizon_;
    std::vector<double> times_;
    std::vector<double> factor_;  // packed lower triangle, row-major
};

inline GaussianPath generate_fbm_exact(double hurst, std::size_t n_steps, double horizon, RandomStream& rng) {
    return ExactFbm(hurst, n_steps, horizon).path(rng);
}

enum class GeneratorKind { spectral, exact };

inline std::string to_string(GeneratorKind kind) { return kind == GeneratorKind::spectral ? "spectral" : "exact"; }

/// Either generator behind one interface, bound to (H, N, T).
class FbmSampler {
public:
    FbmSampler(GeneratorKind kind, double hurst, std::size_t n_steps, double horizon) : horizon_(horizon) {
        if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
        if (kind == GeneratorKind::spectral)
            impl_.emplace<SpectralFbm>(hurst, n_steps);
        else
            impl_.emplace<ExactFbm>(hurst, n_steps, horizon);
    }

    GaussianPath path(RandomStream& rng) const {
        if (const auto* s = std::get_if<SpectralFbm>(&impl_)) return s->path(horizon_, rng);
        return std::get<ExactFbm>(impl_).path(rng);
    }

    const SpectralFbm* spectral() const noexcept { return std::get_if<SpectralFbm>(&impl_); }

private:
    double horizon_;
    std::variant<std::monostate, SpectralFbm, ExactFbm> impl_;
};

}  // namespace fbmarb
