#include "fdist_oracle_values.hpp"
#include "setar/fdist.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using setar::fdist::f_upper_tail;
using setar::fdist::reg_inc_beta;

TEST_CASE("reg_inc_beta boundaries and closed forms", "[fdist]") {
    CHECK(reg_inc_beta(2.5, 3.0, 0.0) == 0.0);
    CHECK(reg_inc_beta(2.5, 3.0, 1.0) == 1.0);
    for (double x : {0.01, 0.2, 0.5, 0.77, 0.999}) {
        CHECK(std::fabs(reg_inc_beta(1.0, 1.0, x) - x) < 1e-12);
        // I_x(a, 1) = x^a
        CHECK(std::fabs(reg_inc_beta(3.5, 1.0, x) - std::pow(x, 3.5)) < 1e-12);
    }
    CHECK(std::fabs(reg_inc_beta(2.0, 2.0, 0.5) - 0.5) < 1e-12);
    CHECK(std::fabs(reg_inc_beta(40.0, 40.0, 0.5) - 0.5) < 1e-12);
}

TEST_CASE("reg_inc_beta complement identity", "[fdist]") {
    for (double a : {0.5, 1.0, 2.5, 7.0, 45.0, 997.0}) {
        for (double b : {0.5, 1.5, 3.0, 12.0, 300.0}) {
            for (double x : {0.001, 0.1, 0.35, 0.5, 0.62, 0.9, 0.9999}) {
                const double s = reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x);
                CHECK(std::fabs(s - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("reg_inc_beta rejects invalid arguments", "[fdist]") {
    CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), setar::DataError);
    CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.5), setar::DataError);
}

TEST_CASE("f_upper_tail matches the arbitrary-precision oracle", "[fdist]") {
    for (const auto& pt : kFOracle) {
        INFO("f=" << pt.f << " df=(" << pt.df1 << "," << pt.df2 << ")");
        CHECK(std::fabs(f_upper_tail(pt.f, pt.df1, pt.df2) - pt.p) < 1e-8);
    }
    CHECK(std::fabs(f_upper_tail(18.0, 5, 90) - kF18_5_90) < 1e-20);
}

TEST_CASE("f_upper_tail limits and monotonicity", "[fdist]") {
    CHECK(f_upper_tail(0.0, 3, 10) == 1.0);
    CHECK(f_upper_tail(1e300, 3, 10) < 1e-200);
    CHECK(f_upper_tail(std::numeric_limits<double>::infinity(), 3, 10) == 0.0);
    double prev = 1.0;
    for (double f = 0.0; f < 30.0; f += 0.25) {
        const double p = f_upper_tail(f, 4, 1000);
        CHECK(p <= prev);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
}

TEST_CASE("f_upper_tail converges for large training sets", "[fdist]") {
    // degrees of freedom of a 500k-row root with 20 predictors
    for (double f : {0.5, 1.0, 1.6, 3.0}) {
        const double p = f_upper_tail(f, 21, 499958);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}
