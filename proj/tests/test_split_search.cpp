#include "setar/dgp.hpp"
#include "setar/split_search.hpp"
#include "test_helpers.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

using namespace setar;
using namespace setar::testing;

TEST_CASE("threshold grid uses interpolated order statistics", "[split_search]") {
    std::vector<double> v(16);
    std::iota(v.begin(), v.end(), 1.0);
    const auto grid = make_threshold_grid(v, 15);
    REQUIRE(grid.values.size() == 15);
    // probability k/16 on 16 points: position 15k/16 past the first order statistic
    for (std::size_t k = 1; k <= 15; ++k) {
        CHECK(grid.values[k - 1] == Catch::Approx(1.0 + 15.0 * static_cast<double>(k) / 16.0).epsilon(1e-15));
    }
    CHECK(grid.values.front() == 1.9375);
    CHECK(grid.values[1] == 2.875);
    CHECK(grid.values.back() == 15.0625);
    CHECK(std::is_sorted(grid.values.begin(), grid.values.end()));
}

TEST_CASE("threshold grid edge cases", "[split_search]") {
    const std::vector<double> constant(10, 3.0);
    CHECK_THROWS_AS(make_threshold_grid(constant), DegenerateColumn);

    const std::vector<double> two{0.0, 1.0};
    const auto g = make_threshold_grid(two, 15);
    REQUIRE(!g.values.empty());
    for (const double t : g.values) {
        CHECK(t > 0.0);
        CHECK(t < 1.0);
    }
    CHECK(std::adjacent_find(g.values.begin(), g.values.end(), std::greater_equal<>()) == g.values.end());

    // heavily tied one-hot style column still yields a usable threshold
    std::vector<double> onehot(100, 0.0);
    onehot[7] = 1.0;
    const auto h = make_threshold_grid(onehot, 15);
    REQUIRE(h.values.size() == 1);
    CHECK(h.values[0] == 0.5);
}

TEST_CASE("split_node partitions with a strict less-than on the left", "[split_search]") {
    EmbeddedMatrix m;
    m.layout.n_lags = 1;
    m.predictors.resize(3, 1);
    m.predictors << 0.2, 0.5, 0.9;
    m.targets = Eigen::VectorXd::Zero(3);
    SplitDecision d;
    d.column_index = 0;
    d.threshold = 0.5;
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto [left, right] = split_node(m, rows, d);
    CHECK(left == std::vector<std::size_t>{0});
    CHECK(right == std::vector<std::size_t>{1, 2});
}

TEST_CASE("tiny nodes have no valid split", "[split_search]") {
    const auto m = random_matrix(5, 1, 3);
    SplitSearchConfig cfg;
    cfg.min_child_size = 8;
    const std::vector<std::size_t> cols{0};
    CHECK_FALSE(get_opt_params(m, iota_rows(5), cols, cfg).has_value());
}

TEST_CASE("linear data still yields a split", "[split_search]") {
    auto m = random_matrix(200, 2, 4);
    for (Eigen::Index i = 0; i < m.predictors.rows(); ++i) {
        m.targets(i) = 0.3 + 0.8 * m.predictors(i, 0) - 0.2 * m.predictors(i, 1) + 0.01 * std::sin(static_cast<double>(i));
    }
    const std::vector<std::size_t> cols{0, 1};
    const auto d = get_opt_params(m, iota_rows(200), cols);
    REQUIRE(d.has_value());
    CHECK(d->left_count + d->right_count == 200);
    CHECK(d->total_sse == Catch::Approx(d->left_sse + d->right_sse));
}

TEST_CASE("incremental scan matches brute-force refits", "[split_search][property]") {
    CounterRng sizes(31337);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t p = 1 + sizes.below(8);
        const std::size_t n = 2 * (p + 2) + sizes.below(300 - 2 * (p + 2));
        const auto m = random_matrix(n, p, 500 + static_cast<std::uint64_t>(trial));
        const auto rows = iota_rows(n);
        const std::size_t column = sizes.below(p);
        for (const auto& c : scan_column(m, rows, column)) {
            if (!c.valid) continue;
            std::vector<std::size_t> left, right;
            for (const auto r : rows) {
                (m.predictors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column)) < c.threshold ? left : right).push_back(r);
            }
            REQUIRE(left.size() == c.left_count);
            INFO("trial " << trial << " n=" << n << " p=" << p << " threshold=" << c.threshold);
            CHECK(relative_error(c.left_sse, direct_sse(m, left)) < 1e-8);
            CHECK(relative_error(c.right_sse, direct_sse(m, right)) < 1e-8);
        }
    }
}

TEST_CASE("returned split is the exhaustive grid minimum and deterministic", "[split_search][property]") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto m = random_matrix(120, 3, seed);
        const auto rows = iota_rows(120);
        const std::vector<std::size_t> cols{0, 1, 2};
        const auto d = get_opt_params(m, rows, cols);
        REQUIRE(d.has_value());
        double best = std::numeric_limits<double>::infinity();
        for (const auto col : cols) {
            for (const auto& c : scan_column(m, rows, col)) {
                if (!c.valid) continue;
                std::vector<std::size_t> left, right;
                for (const auto r : rows) {
                    (m.predictors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) < c.threshold ? left : right).push_back(r);
                }
                best = std::min(best, direct_sse(m, left) + direct_sse(m, right));
            }
        }
        CHECK(relative_error(d->total_sse, best) < 1e-8);

        SplitSearchConfig parallel;
        parallel.threads = 4;
        const auto again = get_opt_params(m, rows, cols, parallel);
        REQUIRE(again.has_value());
        CHECK(again->column_index == d->column_index);
        CHECK(again->threshold == d->threshold);
        CHECK(again->total_sse == d->total_sse);
    }
}

TEST_CASE("split search finds the regime threshold of a SETAR process", "[split_search]") {
    const auto data = dgp::gen_setar2(setar2_config(42, 10, 252, 0.05));
    const auto m = create_input_matrix(data, 2);
    REQUIRE(m.rows() == 2500);
    const std::vector<std::size_t> cols{0, 1};
    const auto d = get_opt_params(m, iota_rows(m.rows()), cols);
    REQUIRE(d.has_value());
    CHECK(d->column_index == 0);
    std::vector<double> l1(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) l1[i] = m.predictors(static_cast<Eigen::Index>(i), 0);
    const auto grid = make_threshold_grid(l1);
    double spacing = 0.0;
    for (std::size_t k = 1; k < grid.values.size(); ++k) spacing = std::max(spacing, grid.values[k] - grid.values[k - 1]);
    CHECK(std::fabs(d->threshold - 0.5) <= spacing);
}
