#pragma once

#include "setar/data_model.hpp"
#include "setar/error.hpp"
#include "setar/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace setar::dgp {

class DivergedSeries : public NumericalError {
public:
    explicit DivergedSeries(const std::string& id)
        : NumericalError("DivergedSeries", "simulated series '" + id + "' diverged") {}
};

inline constexpr double kDivergenceLimit = 1e6;

enum class Kind { chaotic_logistic, mackey_glass, setar2 };

struct LogisticParams {
    double r = 4.0;
    double noise_sd = 0.0;
};

struct MackeyGlassParams {
    double beta = 0.2;
    double gamma = 0.1;
    double n_exp = 10.0;
    double tau = 17.0;
    double dt = 1.0;
    std::size_t warmup = 500;   ///< sampled points discarded before recording
    double history_lo = 0.5;    ///< constant history drawn uniformly from [history_lo, history_hi]
    double history_hi = 1.3;
};

/// Two-regime SETAR: y_t = low[0] + sum_k low[k] y_{t-k} + e_t when y_{t-d} < threshold,
/// otherwise the same with `high`. Coefficient vectors hold the intercept first. Stationarity
/// of the regimes is the caller's responsibility; divergence is detected and reported.
struct Setar2Params {
    std::vector<double> low{0.4, 0.5, -0.2};
    std::vector<double> high{0.1, 0.6, 0.1};
    std::size_t threshold_lag = 1;
    double threshold = 0.5;
    double noise_sd = 0.05;
    std::size_t burn_in = 100;
};

struct DgpConfig {
    Kind kind = Kind::chaotic_logistic;
    std::size_t n_series = 100;
    std::size_t length = 600;
    std::uint64_t seed = 1;
    LogisticParams logistic;
    MackeyGlassParams mackey_glass;
    Setar2Params setar2;
};

inline std::string series_name(std::size_t i) { return "T" + std::to_string(i + 1); }

inline void check_finite(const std::vector<double>& v, const std::string& id) {
    for (const double x : v) {
        if (!std::isfinite(x) || std::fabs(x) > kDivergenceLimit) throw DivergedSeries(id);
    }
}

/// Iterates x_{t+1} = r x_t (1 - x_t), optionally with additive Gaussian noise clipped back
/// into (0, 1). Starting points 0.25, 0.5 and 0.75 are redrawn since they reach a fixed point.
inline std::vector<double> logistic_orbit(double x0, std::size_t length, const LogisticParams& p,
                                          CounterRng* noise) {
    std::vector<double> x(length);
    if (length == 0) return x;
    x[0] = x0;
    for (std::size_t t = 1; t < length; ++t) {
        double v = p.r * x[t - 1] * (1.0 - x[t - 1]);
        if (noise != nullptr && p.noise_sd > 0.0) {
            v += p.noise_sd * noise->normal();
            v = std::clamp(v, 1e-9, 1.0 - 1e-9);
        }
        x[t] = v;
    }
    return x;
}

inline SeriesCollection gen_chaotic_logistic(const DgpConfig& config) {
    if (!(config.logistic.r > 0.0 && config.logistic.r <= 4.0)) throw UsageError("logistic r must lie in (0, 4]");
    if (config.length < 2) throw UsageError("series length must be at least 2");
    SeriesCollection out;
    for (std::size_t s = 0; s < config.n_series; ++s) {
        CounterRng rng(derive_seed(config.seed, s));
        double x0;
        do {
            x0 = rng.uniform_open();
        } while (x0 == 0.25 || x0 == 0.5 || x0 == 0.75);
        auto values = logistic_orbit(x0, config.length, config.logistic, &rng);
        check_finite(values, series_name(s));
        out.series.push_back({series_name(s), std::move(values)});
    }
    return out;
}

namespace detail {

class MackeyGlassIntegrator {
public:
    MackeyGlassIntegrator(const MackeyGlassParams& p, double history)
        : p_(p), delay_steps_(static_cast<std::size_t>(std::llround(p.tau / p.dt))), history_(history) {}

    double rhs(double x, double delayed) const {
        return p_.beta * delayed / (1.0 + std::pow(delayed, p_.n_exp)) - p_.gamma * x;
    }

    // x(t) for t = index * dt; indices below zero fall in the constant history.
    double state(long index) const { return index < 0 ? history_ : x_[static_cast<std::size_t>(index)]; }
    double slope(long index) const { return index < 0 ? 0.0 : dx_[static_cast<std::size_t>(index)]; }

    // Cubic Hermite value halfway between grid points index and index + 1.
    double midpoint(long index) const {
        if (index < 0) return history_;
        const double h = p_.dt;
        return 0.5 * (state(index) + state(index + 1)) + h / 8.0 * (slope(index) - slope(index + 1));
    }

    void run(std::size_t steps) {
        x_.assign(1, history_);
        dx_.assign(1, rhs(history_, history_));
        const double h = p_.dt;
        const long d = static_cast<long>(delay_steps_);
        for (std::size_t i = 0; i < steps; ++i) {
            const long n = static_cast<long>(i);
            const double x = x_[i];
            const double lag0 = state(n - d);
            const double lag_half = midpoint(n - d);
            const double lag1 = state(n - d + 1);
            const double k1 = rhs(x, lag0);
            const double k2 = rhs(x + 0.5 * h * k1, lag_half);
            const double k3 = rhs(x + 0.5 * h * k2, lag_half);
            const double k4 = rhs(x + h * k3, lag1);
            const double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x_.push_back(next);
            dx_.push_back(rhs(next, state(n + 1 - d)));
        }
    }

    const std::vector<double>& trajectory() const { return x_; }

private:
    MackeyGlassParams p_;
    std::size_t delay_steps_;
    double history_;
    std::vector<double> x_;
    std::vector<double> dx_;
};

} // namespace detail

/// Integrates dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t) with fixed-step RK4 from a
/// constant history; delayed values between grid points use cubic Hermite interpolation.
/// The series is sampled once per unit time after `warmup` discarded samples.
inline SeriesCollection gen_mackey_glass(const DgpConfig& config) {
    const auto& p = config.mackey_glass;
    if (!(p.tau >= 1.0) || !(p.dt > 0.0)) throw UsageError("Mackey-Glass needs tau >= 1 and dt > 0");
    const double per_unit = 1.0 / p.dt;
    const double delay_steps = p.tau / p.dt;
    if (std::fabs(per_unit - std::round(per_unit)) > 1e-9 || std::fabs(delay_steps - std::round(delay_steps)) > 1e-9) {
        throw UsageError("Mackey-Glass needs 1/dt and tau/dt to be integers");
    }
    if (config.length < 2) throw UsageError("series length must be at least 2");
    const auto steps_per_sample = static_cast<std::size_t>(std::llround(per_unit));
    const std::size_t samples = p.warmup + config.length;

    SeriesCollection out;
    for (std::size_t s = 0; s < config.n_series; ++s) {
        CounterRng rng(derive_seed(config.seed, s));
        const double history = rng.uniform(p.history_lo, p.history_hi);
        detail::MackeyGlassIntegrator integrator(p, history);
        integrator.run((samples - 1) * steps_per_sample);
        const auto& traj = integrator.trajectory();
        std::vector<double> values(config.length);
        for (std::size_t k = 0; k < config.length; ++k) values[k] = traj[(p.warmup + k) * steps_per_sample];
        check_finite(values, series_name(s));
        out.series.push_back({series_name(s), std::move(values)});
    }
    return out;
}

/// Which regime generated y_t given its lag window (lags[0] = y_{t-1}).
inline bool setar2_low_regime(const Setar2Params& p, std::span<const double> lags) {
    return lags[p.threshold_lag - 1] < p.threshold;
}

inline double setar2_step(const Setar2Params& p, std::span<const double> lags, double noise) {
    const auto& c = setar2_low_regime(p, lags) ? p.low : p.high;
    double y = c[0];
    for (std::size_t k = 1; k < c.size(); ++k) y += c[k] * lags[k - 1];
    return y + noise;
}

inline SeriesCollection gen_setar2(const DgpConfig& config) {
    const auto& p = config.setar2;
    if (p.low.size() != p.high.size() || p.low.size() < 2) {
        throw UsageError("SETAR regimes need equal-length coefficient vectors with at least one lag");
    }
    const std::size_t order = p.low.size() - 1;
    if (p.threshold_lag < 1 || p.threshold_lag > order) throw UsageError("threshold lag outside the AR order");
    if (config.length < 2) throw UsageError("series length must be at least 2");

    SeriesCollection out;
    for (std::size_t s = 0; s < config.n_series; ++s) {
        CounterRng rng(derive_seed(config.seed, s));
        std::vector<double> y;
        y.reserve(order + p.burn_in + config.length);
        for (std::size_t k = 0; k < order; ++k) y.push_back(rng.uniform());
        std::vector<double> lags(order);
        while (y.size() < order + p.burn_in + config.length) {
            for (std::size_t k = 0; k < order; ++k) lags[k] = y[y.size() - 1 - k];
            const double e = p.noise_sd > 0.0 ? p.noise_sd * rng.normal() : 0.0;
            const double v = setar2_step(p, lags, e);
            if (!std::isfinite(v) || std::fabs(v) > kDivergenceLimit) throw DivergedSeries(series_name(s));
            y.push_back(v);
        }
        std::vector<double> values(y.end() - static_cast<std::ptrdiff_t>(config.length), y.end());
        out.series.push_back({series_name(s), std::move(values)});
    }
    return out;
}

inline SeriesCollection simulate(const DgpConfig& config) {
    switch (config.kind) {
    case Kind::chaotic_logistic:
        return gen_chaotic_logistic(config);
    case Kind::mackey_glass:
        return gen_mackey_glass(config);
    case Kind::setar2:
        return gen_setar2(config);
    }
    throw UsageError("unknown simulation kind");
}

} // namespace setar::dgp
