#pragma once

#include "setar/error.hpp"
#include "setar/fdist.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace setar {

enum class StoppingCriterion { lin_test, error_red, both };

struct StoppingConfig {
    StoppingCriterion criterion = StoppingCriterion::both;
    double alpha0 = 0.05;
    double significance_divider = 2.0;
    double error_threshold = 0.03;
    std::size_t max_depth = 1000;

    void validate() const {
        if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw UsageError("alpha0 must lie in (0, 1)");
        if (!(significance_divider > 1.0)) throw UsageError("significance divider must exceed 1");
        if (!(error_threshold >= 0.0)) throw UsageError("error threshold must be non-negative");
    }
};

class InsufficientDf : public NumericalError {
public:
    InsufficientDf(std::size_t n, std::size_t l)
        : NumericalError("InsufficientDf", "F-test needs n - 2l - 2 >= 1 (n=" + std::to_string(n) +
                                               ", l=" + std::to_string(l) + ")") {}
};

struct FTestResult {
    double f_stat = 0.0;
    int df1 = 0;
    int df2 = 0;
    double p_value = 1.0;
};

struct LinearityCheck {
    bool pass = false;
    FTestResult test;
};

/// Nested-model F-test of one regression (parent) against two regime regressions (children)
/// with l predictors each plus intercepts: F = ((SSE_P - SSE_C)/(l+1)) / (SSE_C/(n-2l-2)).
inline LinearityCheck check_linearity(double parent_sse, double child_total_sse, std::size_t n,
                                      std::size_t l, double alpha) {
    if (n < 2 * l + 3) throw InsufficientDf(n, l);
    LinearityCheck out;
    out.test.df1 = static_cast<int>(l + 1);
    out.test.df2 = static_cast<int>(n - 2 * l - 2);
    const double improvement = parent_sse > child_total_sse ? parent_sse - child_total_sse : 0.0;
    if (child_total_sse <= 0.0) {
        // perfect child fit
        out.test.f_stat = improvement > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        out.test.p_value = improvement > 0.0 ? 0.0 : 1.0;
    } else {
        out.test.f_stat = (improvement / out.test.df1) / (child_total_sse / out.test.df2);
        out.test.p_value = fdist::f_upper_tail(out.test.f_stat, out.test.df1, out.test.df2);
    }
    out.pass = out.test.p_value < alpha;
    return out;
}

inline bool check_error_reduction(double parent_sse, double child_total_sse, double error_threshold) {
    if (!(parent_sse > 0.0)) return false;
    return (parent_sse - child_total_sse) / parent_sse >= error_threshold;
}

/// Significance level at tree level `depth`: alpha0 / divider^depth.
inline double alpha_at_depth(double alpha0, double divider, std::size_t depth) {
    return alpha0 / std::pow(divider, static_cast<double>(depth));
}

/// SSE summary of a proposed split, as consumed by the stopping rules.
struct SplitFits {
    double parent_sse = 0.0;
    double child_total_sse = 0.0;
    std::size_t n_rows = 0;
    std::size_t n_predictors = 0;
};

inline bool is_good_split(const SplitFits& fits, const StoppingConfig& config, std::size_t depth) {
    const auto linear = [&] {
        try {
            return check_linearity(fits.parent_sse, fits.child_total_sse, fits.n_rows, fits.n_predictors,
                                   alpha_at_depth(config.alpha0, config.significance_divider, depth))
                .pass;
        } catch (const InsufficientDf&) {
            return false;
        }
    };
    const auto reduction = [&] {
        return check_error_reduction(fits.parent_sse, fits.child_total_sse, config.error_threshold);
    };
    switch (config.criterion) {
    case StoppingCriterion::lin_test:
        return linear();
    case StoppingCriterion::error_red:
        return reduction();
    case StoppingCriterion::both:
        return linear() && reduction();
    }
    return false;
}

} // namespace setar
