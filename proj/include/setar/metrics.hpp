#pragma once

#include "setar/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace setar::metrics {

class LengthMismatch : public DataError {
public:
    LengthMismatch() : DataError("LengthMismatch", "forecasts and actuals differ in length") {}
};

class ZeroDenominator : public NumericalError {
public:
    ZeroDenominator()
        : NumericalError("ZeroDenominator", "in-sample seasonal naive error is zero; MASE is undefined") {}
};

inline constexpr double kDefaultEpsilon = 0.1;

/// Modified sMAPE in percent:
///   100/N * sum |F - Y| / (max(|Y| + |F| + eps, 0.5 + eps) / 2)
inline double msmape(std::span<const double> forecasts, std::span<const double> actuals,
                     double epsilon = kDefaultEpsilon) {
    if (forecasts.size() != actuals.size() || forecasts.empty()) throw LengthMismatch();
    double total = 0.0;
    for (std::size_t k = 0; k < forecasts.size(); ++k) {
        const double f = forecasts[k];
        const double y = actuals[k];
        const double denom = std::max(std::fabs(y) + std::fabs(f) + epsilon, 0.5 + epsilon) / 2.0;
        total += std::fabs(f - y) / denom;
    }
    return 100.0 * total / static_cast<double>(forecasts.size());
}

/// Mean absolute error scaled by the in-sample mean absolute seasonal-naive error of lag S.
inline double mase(std::span<const double> forecasts, std::span<const double> actuals,
                   std::span<const double> training, std::size_t seasonality) {
    if (forecasts.size() != actuals.size() || forecasts.empty()) throw LengthMismatch();
    if (seasonality < 1 || training.size() <= seasonality) {
        throw DataError("TrainingTooShort", "MASE needs more training points than the seasonality");
    }
    double naive = 0.0;
    for (std::size_t k = seasonality; k < training.size(); ++k) {
        naive += std::fabs(training[k] - training[k - seasonality]);
    }
    if (naive == 0.0) throw ZeroDenominator();
    double err = 0.0;
    for (std::size_t k = 0; k < forecasts.size(); ++k) err += std::fabs(forecasts[k] - actuals[k]);
    const double n = static_cast<double>(forecasts.size());
    const double m_minus_s = static_cast<double>(training.size() - seasonality);
    return err / ((n / m_minus_s) * naive);
}

namespace detail {
inline std::size_t round_up_to_five(double v) {
    return static_cast<std::size_t>(std::ceil(v / 5.0 - 1e-12)) * 5;
}
} // namespace detail

/// Lag-count rule of thumb: 1.25 x seasonality, rounded up to a multiple of 5, unless that is
/// below 10 or no seasonality is known, in which case 1.25 x horizon rounded the same way.
inline std::size_t heuristic_lags(std::optional<std::size_t> seasonality, std::size_t horizon) {
    if (horizon < 1) throw UsageError("horizon must be at least 1");
    if (seasonality && *seasonality > 0) {
        const std::size_t lags = detail::round_up_to_five(1.25 * static_cast<double>(*seasonality));
        if (lags >= 10) return lags;
    }
    return std::max<std::size_t>(detail::round_up_to_five(1.25 * static_cast<double>(horizon)), 5);
}

struct SeriesScore {
    std::string id;
    double msmape = 0.0;
    std::optional<double> mase;   ///< empty when the seasonal-naive denominator is zero
};

struct EvaluationReport {
    std::vector<SeriesScore> per_series;
    double mean_msmape = 0.0;
    double median_msmape = 0.0;
    double mean_mase = 0.0;
    double median_mase = 0.0;
    std::size_t mase_undefined = 0;
    std::size_t horizon = 0;
    std::size_t seasonality = 1;
    double epsilon = kDefaultEpsilon;
};

inline double mean_of(std::span<const double> v) {
    if (v.empty()) return std::nan("");
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// Fills the four aggregates from per_series. Series with undefined MASE are excluded from the
/// MASE aggregates and counted in mase_undefined.
inline void aggregate(EvaluationReport& report) {
    std::vector<double> sm;
    std::vector<double> ma;
    report.mase_undefined = 0;
    for (const auto& s : report.per_series) {
        sm.push_back(s.msmape);
        if (s.mase) {
            ma.push_back(*s.mase);
        } else {
            ++report.mase_undefined;
        }
    }
    report.mean_msmape = mean_of(sm);
    report.median_msmape = median_of(sm);
    report.mean_mase = mean_of(ma);
    report.median_mase = median_of(ma);
}

} // namespace setar::metrics
