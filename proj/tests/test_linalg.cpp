#include "setar/linalg.hpp"
#include "setar/random.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

using namespace setar;

namespace {

struct Problem {
    RowMatrix x;
    Eigen::VectorXd y;
};

Problem make_problem(std::size_t n, std::size_t p, std::uint64_t seed) {
    CounterRng rng(seed);
    Problem pr{RowMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)),
               Eigen::VectorXd(static_cast<Eigen::Index>(n))};
    std::vector<double> beta(p + 1);
    for (auto& b : beta) b = rng.uniform(-2.0, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        double y = beta[0];
        for (std::size_t j = 0; j < p; ++j) {
            const double v = rng.normal() * (1.0 + static_cast<double>(j));
            pr.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            y += beta[j + 1] * v;
        }
        pr.y(static_cast<Eigen::Index>(i)) = y + rng.normal();
    }
    return pr;
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> r(hi - lo);
    std::iota(r.begin(), r.end(), lo);
    return r;
}

// Oracle: QR least squares on the raw design with an intercept column, SSE from residuals.
std::pair<Eigen::VectorXd, double> direct_fit(const Problem& pr, const std::vector<std::size_t>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd a(n, pr.x.cols() + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a.row(i).tail(pr.x.cols()) = pr.x.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
        b(i) = pr.y(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
    }
    Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
    return {beta, (b - a * beta).squaredNorm()};
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

} // namespace

TEST_CASE("exact linear data is fitted with zero SSE", "[linalg]") {
    RowMatrix x(3, 1);
    x << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 3, 5, 7;
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto fit = fit_least_squares(x, y, rows);
    CHECK(std::fabs(fit.beta(0) - 1.0) < 1e-12);
    CHECK(std::fabs(fit.beta(1) - 2.0) < 1e-12);
    CHECK(fit.sse < 1e-12);
    CHECK(fit.n_params == 2);
    CHECK(fit.n_obs == 3);

    InnerProducts ip(1);
    const auto from_ip = fit_from_inner_products(accumulate(ip, x, y, rows));
    CHECK(from_ip.beta.isApprox(fit.beta, 1e-12));
}

TEST_CASE("duplicate predictor values alias the slope", "[linalg]") {
    RowMatrix x(2, 1);
    x << 1, 1;
    Eigen::VectorXd y(2);
    y << 0, 2;
    const std::vector<std::size_t> rows{0, 1};
    CHECK_THROWS_AS(fit_least_squares(x, y, rows, RankPolicy::strict), SingularSystem);
    const auto fit = fit_least_squares(x, y, rows, RankPolicy::drop_aliased);
    CHECK(fit.beta(0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(fit.beta(1) == 0.0);
    CHECK(fit.sse == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(fit.rank == 1);
}

TEST_CASE("constant target gives intercept-only fit", "[linalg]") {
    RowMatrix x(4, 1);
    x << 0.3, -1.0, 2.0, 5.0;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 4.25);
    const auto fit = fit_least_squares(x, y, std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(fit.beta(0) == Catch::Approx(4.25).epsilon(1e-12));
    CHECK(std::fabs(fit.beta(1)) < 1e-12);
    CHECK(fit.sse < 1e-20);
}

TEST_CASE("accumulate is additive and empty accumulation is the identity", "[linalg]") {
    const auto pr = make_problem(40, 3, 7);
    const InnerProducts zero(3);
    const auto all = accumulate(zero, pr.x, pr.y, range(0, 40));
    const auto a = accumulate(zero, pr.x, pr.y, range(0, 17));
    const auto ab = accumulate(a, pr.x, pr.y, range(17, 40));
    CHECK(ab.count == all.count);
    CHECK(ab.gram.isApprox(all.gram, 1e-12));
    CHECK(ab.cross.isApprox(all.cross, 1e-12));
    CHECK(rel(ab.sum_sq, all.sum_sq) < 1e-12);
    CHECK(ab.gram.isApprox(ab.gram.transpose(), 0.0));

    const auto same = accumulate(a, pr.x, pr.y, std::vector<std::size_t>{});
    CHECK(same.count == a.count);
    CHECK(same.gram == a.gram);

    const auto b = accumulate(zero, pr.x, pr.y, range(17, 40));
    const auto sum = a + b;
    CHECK(sum.gram.isApprox(all.gram, 1e-12));
}

TEST_CASE("accumulate rejects mismatched widths", "[linalg]") {
    const auto pr = make_problem(10, 3, 1);
    CHECK_THROWS_AS(accumulate(InnerProducts(2), pr.x, pr.y, range(0, 10)), DimensionMismatch);
}

TEST_CASE("right complement equals direct accumulation of the remaining rows", "[linalg]") {
    const auto pr = make_problem(10, 2, 11);
    const InnerProducts zero(2);
    const auto parent = accumulate(zero, pr.x, pr.y, range(0, 10));
    const auto left = accumulate(zero, pr.x, pr.y, range(0, 4));
    const auto right = right_complement(parent, left);
    const auto direct = accumulate(zero, pr.x, pr.y, range(4, 10));
    CHECK(right.count == 6);
    CHECK(right.gram.isApprox(direct.gram, 1e-10));
    CHECK(right.cross.isApprox(direct.cross, 1e-10));
    CHECK(rel(right.sum_sq, direct.sum_sq) < 1e-10);

    CHECK(right_complement(parent, parent).count == 0);
    CHECK(right_complement(parent, parent).gram.isZero(1e-12));
    CHECK(right_complement(parent, zero).gram == parent.gram);
}

TEST_CASE("inner-product fit matches a direct QR solve", "[linalg]") {
    const auto pr = make_problem(50, 4, 2024);
    const auto rows = range(0, 50);
    const auto fit = fit_from_inner_products(accumulate(InnerProducts(4), pr.x, pr.y, rows));
    const auto [beta, sse] = direct_fit(pr, rows);
    for (Eigen::Index k = 0; k < beta.size(); ++k) CHECK(rel(fit.beta(k), beta(k)) < 1e-8);
    CHECK(rel(fit.sse, sse) < 1e-8);
}

TEST_CASE("SSE identity matches row-by-row residuals", "[linalg][property]") {
    CounterRng sizes(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t p = 1 + sizes.below(6);
        const std::size_t n = p + 2 + sizes.below(150);
        const auto pr = make_problem(n, p, 1000 + static_cast<std::uint64_t>(trial));
        const auto fit = fit_least_squares(pr.x, pr.y, range(0, n));
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            const double e = pr.y(r) - fit.predict(std::span<const double>(pr.x.row(r).data(), p));
            resid += e * e;
        }
        CHECK(rel(fit.sse, resid) < 1e-6);
    }
}

TEST_CASE("prefix/suffix fits equal direct refits and never beat the parent", "[linalg][property]") {
    CounterRng sizes(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t p = 1 + sizes.below(8);
        const std::size_t n = p + 2 + sizes.below(200 - p - 1);
        const auto pr = make_problem(n, p, 77000 + static_cast<std::uint64_t>(trial));
        const std::size_t min_rows = p + 2;
        if (n < 2 * min_rows) continue;
        const std::size_t cut = min_rows + sizes.below(n - 2 * min_rows + 1);
        const InnerProducts zero(p);
        const auto parent = accumulate(zero, pr.x, pr.y, range(0, n));
        const auto left = accumulate(zero, pr.x, pr.y, range(0, cut));
        const auto lf = fit_from_inner_products(left);
        const auto rf = fit_from_inner_products(right_complement(parent, left));
        const auto [lb, ls] = direct_fit(pr, range(0, cut));
        const auto [rb, rs] = direct_fit(pr, range(cut, n));
        INFO("trial " << trial << " n=" << n << " p=" << p << " cut=" << cut);
        CHECK(rel(lf.sse, ls) < 1e-8);
        CHECK(rel(rf.sse, rs) < 1e-8);
        for (Eigen::Index k = 0; k < lb.size(); ++k) {
            CHECK(std::fabs(lf.beta(k) - lb(k)) <= 1e-8 * std::max(1.0, std::fabs(lb(k))));
            CHECK(std::fabs(rf.beta(k) - rb(k)) <= 1e-8 * std::max(1.0, std::fabs(rb(k))));
        }
        const double parent_sse = fit_from_inner_products(parent).sse;
        CHECK(lf.sse + rf.sse <= parent_sse * (1.0 + 1e-9));
    }
}
