#pragma once

#include "setar/data_model.hpp"
#include "setar/dgp.hpp"
#include "setar/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace setar::testing {

inline EmbeddedMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    CounterRng rng(seed);
    EmbeddedMatrix m;
    m.layout.n_lags = p;
    m.predictors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    m.targets.resize(static_cast<Eigen::Index>(n));
    m.series_ids = {"r"};
    std::vector<double> beta(p + 1);
    for (auto& b : beta) b = rng.uniform(-1.5, 1.5);
    for (std::size_t i = 0; i < n; ++i) {
        double y = beta[0];
        for (std::size_t j = 0; j < p; ++j) {
            const double v = rng.normal();
            m.predictors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            y += beta[j + 1] * v;
        }
        // a kink on column 0 so that splits matter
        y += 1.5 * std::fabs(m.predictors(static_cast<Eigen::Index>(i), 0));
        m.targets(static_cast<Eigen::Index>(i)) = y + rng.normal();
        m.series_index.push_back(0);
        m.target_time.push_back(static_cast<long>(i));
    }
    return m;
}

/// Oracle SSE: QR least squares with intercept on the raw rows, residuals summed directly.
inline double direct_sse(const EmbeddedMatrix& m, const std::vector<std::size_t>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = m.predictors.cols();
    Eigen::MatrixXd a(n, p + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
        a(i, 0) = 1.0;
        a.row(i).tail(p) = m.predictors.row(r);
        b(i) = m.targets(r);
    }
    const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
    return (b - a * beta).squaredNorm();
}

inline std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

inline double relative_error(double a, double b) {
    return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

/// Two-regime SETAR data with a threshold on lag 1 at 0.5; `n_rows` rows at lag 2.
inline dgp::DgpConfig setar2_config(std::uint64_t seed, std::size_t n_series, std::size_t length, double noise) {
    dgp::DgpConfig cfg;
    cfg.kind = dgp::Kind::setar2;
    cfg.seed = seed;
    cfg.n_series = n_series;
    cfg.length = length;
    cfg.setar2.noise_sd = noise;
    return cfg;
}

/// Stationary AR(2) series with Gaussian noise: a single global linear model.
inline SeriesCollection linear_ar(std::uint64_t seed, std::size_t n_series, std::size_t length) {
    SeriesCollection c;
    for (std::size_t s = 0; s < n_series; ++s) {
        CounterRng rng(derive_seed(seed, s));
        std::vector<double> y{0.0, 0.0};
        for (std::size_t t = 0; t < length + 50; ++t) y.push_back(0.5 * y[y.size() - 1] + 0.2 * y[y.size() - 2] + rng.normal());
        c.series.push_back({"s" + std::to_string(s), std::vector<double>(y.end() - static_cast<std::ptrdiff_t>(length), y.end())});
    }
    return c;
}

} // namespace setar::testing
