#pragma once

#include "setar/error.hpp"

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace setar {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Relative pivot tolerance for the normal-equation factorization. A column whose Cholesky
/// pivot falls below kRankTolerance * (its own diagonal entry) is treated as aliased.
inline constexpr double kRankTolerance = 1e-10;

/// Result of an ordinary least-squares fit with an intercept.
/// beta(0) is the intercept, beta(1 + j) the coefficient of predictor column j.
struct LinearFit {
    Eigen::VectorXd beta;
    double sse = 0.0;
    std::size_t n_obs = 0;
    std::size_t n_params = 0;
    std::size_t rank = 0;

    bool full_rank() const noexcept { return rank == n_params; }

    double predict(std::span<const double> x) const {
        if (x.size() + 1 != static_cast<std::size_t>(beta.size())) {
            throw DimensionMismatch("predictor length " + std::to_string(x.size()) +
                                    " does not match model with " +
                                    std::to_string(beta.size() - 1) + " predictors");
        }
        double value = beta(0);
        for (std::size_t j = 0; j < x.size(); ++j) value += beta(static_cast<Eigen::Index>(j + 1)) * x[j];
        return value;
    }
};

/// Sufficient statistics of a row set for a linear fit with intercept:
/// gram = sum xbar xbar^T, cross = sum xbar y, sum_sq = sum y^2, where xbar = [1, x].
struct InnerProducts {
    Eigen::MatrixXd gram;
    Eigen::VectorXd cross;
    double sum_sq = 0.0;
    std::size_t count = 0;

    InnerProducts() = default;

    explicit InnerProducts(std::size_t n_predictors)
        : gram(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_predictors + 1),
                                     static_cast<Eigen::Index>(n_predictors + 1))),
          cross(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_predictors + 1))) {}

    std::size_t n_predictors() const noexcept {
        return cross.size() == 0 ? 0 : static_cast<std::size_t>(cross.size() - 1);
    }
    std::size_t n_params() const noexcept { return static_cast<std::size_t>(cross.size()); }

    /// Rank-one update with a single observation.
    void add(const double* x, double y) {
        const Eigen::Index k = cross.size();
        double* g = gram.data();
        // column 0 / row 0 carry the intercept
        g[0] += 1.0;
        for (Eigen::Index j = 1; j < k; ++j) {
            const double xj = x[j - 1];
            g[j] += xj;          // (j, 0)
            g[j * k] += xj;      // (0, j)
            double* col = g + j * k;
            for (Eigen::Index i = 1; i < k; ++i) col[i] += x[i - 1] * xj;
        }
        cross(0) += y;
        for (Eigen::Index j = 1; j < k; ++j) cross(j) += x[j - 1] * y;
        sum_sq += y * y;
        ++count;
    }

    InnerProducts& operator+=(const InnerProducts& other) {
        check_compatible(other);
        gram += other.gram;
        cross += other.cross;
        sum_sq += other.sum_sq;
        count += other.count;
        return *this;
    }

    InnerProducts& operator-=(const InnerProducts& other) {
        check_compatible(other);
        gram -= other.gram;
        cross -= other.cross;
        sum_sq -= other.sum_sq;
        count -= other.count;
        return *this;
    }

    friend InnerProducts operator+(InnerProducts lhs, const InnerProducts& rhs) { return lhs += rhs; }

private:
    void check_compatible(const InnerProducts& other) const {
        if (other.cross.size() != cross.size()) {
            throw DimensionMismatch("inner products have different parameter counts");
        }
    }
};

/// Accumulate the given rows of (predictors, targets) into ip.
inline InnerProducts accumulate(InnerProducts ip, const RowMatrix& predictors,
                                const Eigen::VectorXd& targets, std::span<const std::size_t> rows) {
    if (static_cast<std::size_t>(predictors.cols()) != ip.n_predictors()) {
        throw DimensionMismatch("row width " + std::to_string(predictors.cols()) +
                                " does not match inner products of width " +
                                std::to_string(ip.n_predictors()));
    }
    for (const std::size_t r : rows) {
        ip.add(predictors.row(static_cast<Eigen::Index>(r)).data(),
               targets(static_cast<Eigen::Index>(r)));
    }
    return ip;
}

/// Inner products of the rows in parent but not in left.
inline InnerProducts right_complement(const InnerProducts& parent, const InnerProducts& left) {
    assert(left.count <= parent.count);
    InnerProducts right = parent;
    right -= left;
    return right;
}

enum class RankPolicy {
    strict,       ///< throw SingularSystem on any aliased column
    drop_aliased, ///< aliased columns get coefficient 0 (lm-style); always succeeds
};

namespace detail {

struct NormalSolution {
    Eigen::VectorXd beta;
    std::size_t rank = 0;
};

// Cholesky in natural column order. Columns whose pivot is negligible relative to their own
// diagonal are aliased onto earlier columns: they are skipped and their coefficient is 0.
inline NormalSolution solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& cross) {
    const Eigen::Index k = cross.size();
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(k, k);
    std::vector<bool> active(static_cast<std::size_t>(k), false);
    std::size_t rank = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        double pivot = gram(j, j);
        for (Eigen::Index m = 0; m < j; ++m) pivot -= lower(j, m) * lower(j, m);
        const double diag = gram(j, j);
        if (!(diag > 0.0) || !(pivot > kRankTolerance * diag)) continue;
        active[static_cast<std::size_t>(j)] = true;
        ++rank;
        const double ljj = std::sqrt(pivot);
        lower(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < k; ++i) {
            double v = gram(i, j);
            for (Eigen::Index m = 0; m < j; ++m) v -= lower(i, m) * lower(j, m);
            lower(i, j) = v / ljj;
        }
    }
    // forward substitution L z = c, then back substitution L^T beta = z, over active columns
    Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        double v = cross(i);
        for (Eigen::Index m = 0; m < i; ++m) v -= lower(i, m) * z(m);
        z(i) = v / lower(i, i);
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = k - 1; i >= 0; --i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        double v = z(i);
        for (Eigen::Index m = i + 1; m < k; ++m) v -= lower(m, i) * beta(m);
        beta(i) = v / lower(i, i);
    }
    return {std::move(beta), rank};
}

} // namespace detail

/// Least-squares fit from sufficient statistics. The SSE uses sum_sq - beta^T gram beta,
/// which equals sum_sq - beta^T cross at the solution; tiny negative values are clamped to 0.
inline LinearFit fit_from_inner_products(const InnerProducts& ip,
                                         RankPolicy policy = RankPolicy::strict) {
    const std::size_t n_params = ip.n_params();
    if (n_params == 0) throw DimensionMismatch("inner products are empty");
    auto solution = detail::solve_normal_equations(ip.gram, ip.cross);
    if (policy == RankPolicy::strict && solution.rank < n_params) {
        throw SingularSystem("normal equations are rank deficient (rank " +
                             std::to_string(solution.rank) + " of " + std::to_string(n_params) +
                             ", " + std::to_string(ip.count) + " rows)");
    }
    LinearFit fit;
    fit.sse = ip.sum_sq - solution.beta.dot(ip.cross);
    if (fit.sse < 0.0) fit.sse = 0.0;
    fit.beta = std::move(solution.beta);
    fit.n_obs = ip.count;
    fit.n_params = n_params;
    fit.rank = solution.rank;
    return fit;
}

/// Sum of squared residuals of `beta` over the selected rows. At the least-squares solution this
/// is stationary in beta, so it keeps digits that sum_sq - beta^T cross cancels away.
inline double residual_sse(const Eigen::VectorXd& beta, const RowMatrix& predictors,
                           const Eigen::VectorXd& targets, std::span<const std::size_t> rows) {
    const Eigen::Index p = predictors.cols();
    double sse = 0.0;
    for (const std::size_t r : rows) {
        const auto i = static_cast<Eigen::Index>(r);
        const double e = targets(i) - beta(0) - predictors.row(i).dot(beta.tail(p));
        sse += e * e;
    }
    return sse;
}

/// Direct least-squares fit over the selected rows.
inline LinearFit fit_least_squares(const RowMatrix& predictors, const Eigen::VectorXd& targets,
                                   std::span<const std::size_t> rows,
                                   RankPolicy policy = RankPolicy::strict) {
    InnerProducts ip(static_cast<std::size_t>(predictors.cols()));
    auto fit = fit_from_inner_products(accumulate(std::move(ip), predictors, targets, rows), policy);
    fit.sse = residual_sse(fit.beta, predictors, targets, rows);
    return fit;
}

} // namespace setar
