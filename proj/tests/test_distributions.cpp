#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ervmix/distributions.hpp"
#include "test_support.hpp"

using namespace ervmix;

TEST_CASE("nb_log_pmf pins P(0) = theta^r") {
    CHECK(nb_log_pmf(0, {1.0, 0.5}) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(nb_log_pmf(0, {3.5, 0.2}) == doctest::Approx(3.5 * std::log(0.2)).epsilon(1e-14));
}

TEST_CASE("nb mass normalizes over a long support prefix") {
    double total = 0.0;
    for (std::int64_t x = 0; x <= 1000; ++x) total += std::exp(nb_log_pmf(x, {10.0, 0.5}));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("nb matches the integer binomial-coefficient formula at integer r") {
    for (const double r : {1.0, 2.0, 3.0, 7.0})
        for (const double theta : {0.1, 0.4, 0.8})
            for (std::int64_t x = 0; x <= 50; x += 7) {
                const double direct = std::log(testsup::nb_pmf_direct(x, r, theta));
                CHECK(nb_log_pmf(x, {r, theta}) == doctest::Approx(direct).epsilon(1e-10));
            }
}

TEST_CASE("nb moments") {
    const auto mom = nb_moments({10.0, 0.5});
    CHECK(mom.mean == doctest::Approx(10.0));
    CHECK(mom.variance == doctest::Approx(20.0));
    CHECK(nb_moments({1.0, 0.999}).mean == doctest::Approx(0.001 / 0.999));
    // variance/mean = 1/theta > 1 for any valid parameters
    std::mt19937_64 rng(7);
    for (int it = 0; it < 50; ++it) {
        const double r = std::uniform_real_distribution<double>(0.01, 40.0)(rng);
        const double theta = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
        const auto m2 = nb_moments({r, theta});
        CHECK(m2.variance / m2.mean == doctest::Approx(1.0 / theta).epsilon(1e-12));
        CHECK(m2.variance >= m2.mean);
    }
}

TEST_CASE("geometric equals nb with r = 1") {
    CHECK(geometric_log_pmf(0, 0.25) == doctest::Approx(std::log(0.25)));
    for (const double p : {0.1, 0.5, 0.9})
        for (std::int64_t x = 0; x <= 100; ++x)
            CHECK(geometric_log_pmf(x, p) ==
                  doctest::Approx(nb_log_pmf(x, {1.0, p})).epsilon(1e-12));
    // mean (1-p)/p at p = 1/4 is 3
    CHECK((1.0 - 0.25) / 0.25 == doctest::Approx(3.0));
}

TEST_CASE("geometric tail overtakes the nb tail despite the smaller mean") {
    // NB(10, 1/2) has mean 10, geometric(1/4) mean 3.
    CHECK(nb_moments({10.0, 0.5}).mean == doctest::Approx(10.0));
    CHECK(nb_log_pmf(60, {10.0, 0.5}) < geometric_log_pmf(60, 0.25));
    // The nb dominates around its mode, but past some point the geometric
    // mass stays on top for good.
    CHECK(nb_log_pmf(10, {10.0, 0.5}) > geometric_log_pmf(10, 0.25));
    std::int64_t last_nb_win = -1;
    for (std::int64_t x = 0; x <= 400; ++x)
        if (nb_log_pmf(x, {10.0, 0.5}) >= geometric_log_pmf(x, 0.25)) last_nb_win = x;
    REQUIRE(last_nb_win >= 0);
    CHECK(last_nb_win < 100);
    for (std::int64_t x = last_nb_win + 1; x <= 1000; ++x)
        CHECK(geometric_log_pmf(x, 0.25) > nb_log_pmf(x, {10.0, 0.5}));
}

TEST_CASE("poisson log pmf") {
    CHECK(poisson_log_pmf(0, 1.0) == doctest::Approx(-1.0));
    double total = 0.0, mean = 0.0, second = 0.0;
    for (std::int64_t x = 0; x <= 200; ++x) {
        const double p = std::exp(poisson_log_pmf(x, 5.0));
        total += p;
        mean += static_cast<double>(x) * p;
        second += static_cast<double>(x) * static_cast<double>(x) * p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mean == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(second - mean * mean == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("log masses are finite and non-positive on valid input") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        const double r = std::exp(std::uniform_real_distribution<double>(-4.0, 5.0)(rng));
        const double theta = std::uniform_real_distribution<double>(1e-6, 1.0 - 1e-6)(rng);
        const std::int64_t x = std::uniform_int_distribution<std::int64_t>(0, 2000)(rng);
        const double v = nb_log_pmf(x, {r, theta});
        CHECK(std::isfinite(v));
        CHECK(v <= 0.0);
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(nb_log_pmf(0, {0.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(nb_log_pmf(0, {-1.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(nb_log_pmf(0, {1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(nb_log_pmf(0, {1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(nb_log_pmf(-1, {1.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(geometric_log_pmf(0, 1.5), std::domain_error);
    CHECK_THROWS_AS(poisson_log_pmf(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
}

TEST_CASE("log_sum_exp2") {
    CHECK(log_sum_exp2(std::log(0.3), std::log(0.7)) == doctest::Approx(0.0).epsilon(1e-12));
    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(log_sum_exp2(ninf, 1.5) == doctest::Approx(1.5));
    CHECK(log_sum_exp2(2.5, ninf) == doctest::Approx(2.5));
    CHECK(log_sum_exp2(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(1e-6) == doctest::Approx(-4.753424309).epsilon(1e-7));
}
