#pragma once

#include "setar/data_model.hpp"
#include "setar/error.hpp"
#include "setar/linalg.hpp"
#include "setar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace setar {

class DegenerateColumn : public DataError {
public:
    explicit DegenerateColumn(std::size_t column)
        : DataError("DegenerateColumn", "column " + std::to_string(column) + " is constant"),
          column(column) {}
    std::size_t column;
};

/// A chosen threshold split. Rows with value < threshold in column_index go left, the rest right.
struct SplitDecision {
    std::size_t column_index = 0;
    double threshold = 0.0;
    double left_sse = 0.0;
    double right_sse = 0.0;
    double total_sse = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

struct ThresholdGrid {
    std::vector<double> values;
    std::size_t source_column = 0;
};

struct SplitSearchConfig {
    std::size_t grid_size = 15;
    /// Minimum rows per child; 0 selects n_params + 1 (= predictors + 2).
    std::size_t min_child_size = 0;
    unsigned threads = 1;
};

inline std::size_t min_child_rows(std::size_t n_predictors, const SplitSearchConfig& config) {
    return config.min_child_size > 0 ? config.min_child_size : n_predictors + 2;
}

namespace detail {

// Quantiles at probabilities k/(q+1), k = 1..q, by linear interpolation between order
// statistics (x[h] with h = (n-1)p, zero-based). Thresholds outside the open interval
// (min, max) are dropped and duplicates collapsed; if nothing survives, the midpoint between
// the two smallest distinct values is used.
inline std::vector<double> quantile_thresholds(std::span<const double> sorted, std::size_t q) {
    const std::size_t n = sorted.size();
    const double lo = sorted.front();
    const double hi = sorted.back();
    std::vector<double> out;
    out.reserve(q);
    for (std::size_t k = 1; k <= q; ++k) {
        const double p = static_cast<double>(k) / static_cast<double>(q + 1);
        const double h = static_cast<double>(n - 1) * p;
        const auto below = static_cast<std::size_t>(std::floor(h));
        const double frac = h - static_cast<double>(below);
        double v = sorted[below];
        if (below + 1 < n && frac > 0.0) v += frac * (sorted[below + 1] - sorted[below]);
        if (v > lo && v < hi && (out.empty() || v > out.back())) out.push_back(v);
    }
    if (out.empty()) {
        const auto next = std::upper_bound(sorted.begin(), sorted.end(), lo);
        out.push_back(lo + (*next - lo) / 2.0);
    }
    return out;
}

} // namespace detail

inline ThresholdGrid make_threshold_grid(std::span<const double> column_values, std::size_t q = 15,
                                         std::size_t source_column = 0) {
    if (q < 1) throw UsageError("threshold grid size must be at least 1");
    if (column_values.empty()) throw DegenerateColumn(source_column);
    std::vector<double> sorted(column_values.begin(), column_values.end());
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() < sorted.back())) throw DegenerateColumn(source_column);
    return {detail::quantile_thresholds(sorted, q), source_column};
}

/// Left/right fits for one threshold of a column scan.
/// Child SSEs below this fraction of the node's centred sum of squares are recomputed from rows.
inline constexpr double kRefineRatio = 1e-2;

struct ScanCandidate {
    double threshold = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
    double left_sse = 0.0;
    double right_sse = 0.0;
    bool valid = false;
};

/// Node rows centred on the node means. The intercept absorbs the shift, so every SSE is
/// unchanged while the inner products lose far less to cancellation.
class CenteredNode {
public:
    CenteredNode(const EmbeddedMatrix& matrix, std::span<const std::size_t> rows)
        : n_(rows.size()), p_(matrix.cols()), x_(n_ * p_), y_(n_) {
        std::vector<double> mean_x(p_, 0.0);
        double mean_y = 0.0;
        for (const std::size_t r : rows) {
            const double* src = matrix.predictors.row(static_cast<Eigen::Index>(r)).data();
            for (std::size_t j = 0; j < p_; ++j) mean_x[j] += src[j];
            mean_y += matrix.targets(static_cast<Eigen::Index>(r));
        }
        for (auto& m : mean_x) m /= static_cast<double>(n_);
        mean_y /= static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* src = matrix.predictors.row(static_cast<Eigen::Index>(rows[i])).data();
            for (std::size_t j = 0; j < p_; ++j) x_[i * p_ + j] = src[j] - mean_x[j];
            y_[i] = matrix.targets(static_cast<Eigen::Index>(rows[i])) - mean_y;
        }
        parent_ = InnerProducts(p_);
        for (std::size_t i = 0; i < n_; ++i) parent_.add(&x_[i * p_], y_[i]);
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t n_predictors() const noexcept { return p_; }
    const double* x(std::size_t i) const noexcept { return &x_[i * p_]; }
    double y(std::size_t i) const noexcept { return y_[i]; }
    const InnerProducts& parent() const noexcept { return parent_; }

    /// Squared residuals of a centred-row fit over positions order[begin, end).
    double residual_sse(const Eigen::VectorXd& beta, const std::vector<std::size_t>& order,
                        std::size_t begin, std::size_t end) const {
        double sse = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const double* xi = x(order[k]);
            double e = y(order[k]) - beta(0);
            for (std::size_t j = 0; j < p_; ++j) e -= beta(static_cast<Eigen::Index>(j + 1)) * xi[j];
            sse += e * e;
        }
        return sse;
    }

private:
    std::size_t n_;
    std::size_t p_;
    std::vector<double> x_;
    std::vector<double> y_;
    InnerProducts parent_;
};

namespace detail {

// Scan one column: sort local row positions by value (ties by position), then grow the left
// inner products across the threshold grid; the right side is the parent minus the left.
inline std::vector<ScanCandidate> scan_centered(const EmbeddedMatrix& matrix,
                                                std::span<const std::size_t> rows,
                                                const CenteredNode& node, std::size_t column,
                                                const SplitSearchConfig& config) {
    const std::size_t n = rows.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> value(n);
    for (std::size_t i = 0; i < n; ++i) {
        value[i] = matrix.predictors(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(column));
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = value[order[i]];
    if (n == 0 || !(sorted.front() < sorted.back())) throw DegenerateColumn(column);

    const auto thresholds = quantile_thresholds(sorted, config.grid_size);
    const std::size_t min_rows = min_child_rows(node.n_predictors(), config);

    std::vector<ScanCandidate> out;
    out.reserve(thresholds.size());
    InnerProducts left(node.n_predictors());
    std::size_t pos = 0;
    for (const double t : thresholds) {
        while (pos < n && sorted[pos] < t) {
            left.add(node.x(order[pos]), node.y(order[pos]));
            ++pos;
        }
        ScanCandidate c;
        c.threshold = t;
        c.left_count = pos;
        c.right_count = n - pos;
        if (c.left_count >= min_rows && c.right_count >= min_rows) {
            const auto left_fit = fit_from_inner_products(left, RankPolicy::drop_aliased);
            const auto right_fit =
                fit_from_inner_products(right_complement(node.parent(), left), RankPolicy::drop_aliased);
            c.left_sse = left_fit.sse;
            c.right_sse = right_fit.sse;
            // a child SSE far below the node's scale has lost digits to cancellation
            const double floor = kRefineRatio * node.parent().sum_sq;
            if (c.left_sse < floor) c.left_sse = node.residual_sse(left_fit.beta, order, 0, pos);
            if (c.right_sse < floor) c.right_sse = node.residual_sse(right_fit.beta, order, pos, n);
            c.valid = std::isfinite(c.left_sse) && std::isfinite(c.right_sse);
        }
        out.push_back(c);
    }
    return out;
}

} // namespace detail

/// Every grid threshold of one column with its incremental left/right fits.
inline std::vector<ScanCandidate> scan_column(const EmbeddedMatrix& matrix,
                                              std::span<const std::size_t> rows, std::size_t column,
                                              const SplitSearchConfig& config = {}) {
    if (column >= matrix.cols()) throw DimensionMismatch("column index out of range");
    const CenteredNode node(matrix, rows);
    return detail::scan_centered(matrix, rows, node, column, config);
}

/// Grid search over (column, threshold) for the split with minimum total child SSE. Returns
/// nullopt when no candidate leaves both children with at least the minimum row count.
/// Ties go to the lower column index, then the lower threshold.
inline std::optional<SplitDecision> get_opt_params(const EmbeddedMatrix& matrix,
                                                   std::span<const std::size_t> rows,
                                                   std::span<const std::size_t> candidate_columns,
                                                   const SplitSearchConfig& config = {}) {
    const std::size_t min_rows = min_child_rows(matrix.cols(), config);
    if (rows.size() < 2 * min_rows || candidate_columns.empty()) return std::nullopt;

    std::vector<std::size_t> columns(candidate_columns.begin(), candidate_columns.end());
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

    const CenteredNode node(matrix, rows);
    std::vector<std::optional<SplitDecision>> best(columns.size());
    parallel_for(columns.size(), config.threads, [&](std::size_t ci) {
        const std::size_t column = columns[ci];
        if (column >= matrix.cols()) throw DimensionMismatch("candidate column out of range");
        std::vector<ScanCandidate> scan;
        try {
            scan = detail::scan_centered(matrix, rows, node, column, config);
        } catch (const DegenerateColumn&) {
            return;
        }
        for (const auto& c : scan) {
            if (!c.valid) continue;
            const double total = c.left_sse + c.right_sse;
            if (!best[ci] || total < best[ci]->total_sse) {
                best[ci] = SplitDecision{column, c.threshold, c.left_sse, c.right_sse,
                                         total, c.left_count, c.right_count};
            }
        }
    });

    std::optional<SplitDecision> result;
    for (const auto& b : best) {
        if (b && (!result || b->total_sse < result->total_sse)) result = b;
    }
    return result;
}

/// Partition rows by the decision: value < threshold goes left. Row order is preserved.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_node(const EmbeddedMatrix& matrix, std::span<const std::size_t> rows, const SplitDecision& decision) {
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    const auto col = static_cast<Eigen::Index>(decision.column_index);
    for (const std::size_t r : rows) {
        if (matrix.predictors(static_cast<Eigen::Index>(r), col) < decision.threshold) {
            out.first.push_back(r);
        } else {
            out.second.push_back(r);
        }
    }
    return out;
}

} // namespace setar
