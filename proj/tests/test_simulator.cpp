#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ervmix/simulator.hpp"
#include "test_support.hpp"

using namespace ervmix;

TEST_CASE("same seed gives bit-identical data") {
    SimSpec spec;
    spec.num_viruses = 30;
    spec.num_columns = 12;
    spec.replicated_animals = 3;
    spec.seed = 42;
    const SimData a = simulate(spec);
    const SimData b = simulate(spec);
    CHECK(a.counts.counts == b.counts.counts);
    CHECK(a.truth == b.truth);
    CHECK(a.true_params.alpha == b.true_params.alpha);
    spec.seed = 43;
    const SimData c = simulate(spec);
    CHECK(a.counts.counts != c.counts.counts);
}

TEST_CASE("pi = 1 makes every animal a carrier") {
    SimSpec spec;
    spec.num_viruses = 10;
    spec.num_columns = 8;
    spec.replicated_animals = 2;
    spec.pi_model = PiModel::Shared;
    spec.pi = std::vector<double>{1.0};
    const SimData sim = simulate(spec);
    for (const auto v : sim.truth.data()) CHECK(v == 1);
}

TEST_CASE("replicate columns share the carrier state and the metadata groups them") {
    SimSpec spec;
    spec.num_viruses = 25;
    spec.num_columns = 14;
    spec.replicated_animals = 4;
    spec.seed = 7;
    const SimData sim = simulate(spec);
    CHECK(sim.meta.num_groups() == spec.num_unique());
    std::size_t replicated = 0;
    for (const auto& members : sim.meta.replicate_groups) replicated += members.size() > 1;
    CHECK(replicated == 4);
    // replicate columns of animal t pair column t with column unique+t
    for (int t = 0; t < 4; ++t) {
        const auto& members = sim.meta.replicate_groups[t];
        REQUIRE(members.size() == 2);
        CHECK(members[0] == t);
        CHECK(members[1] == static_cast<int>(spec.num_unique()) + t);
        // and they sit in different experiments
        CHECK(sim.meta.experiment_of_column[members[0]] !=
              sim.meta.experiment_of_column[members[1]]);
    }
}

TEST_CASE("carrier frequencies follow pi") {
    SimSpec spec;
    spec.num_viruses = 400;
    spec.num_columns = 30;
    spec.replicated_animals = 0;
    spec.pi_model = PiModel::Shared;
    spec.pi = std::vector<double>{0.3};
    spec.seed = 11;
    const SimData sim = simulate(spec);
    double mean = 0.0;
    for (const auto v : sim.truth.data()) mean += v;
    mean /= static_cast<double>(sim.truth.size());
    // 12000 draws at pi = 0.3: three standard errors is about 0.0126
    CHECK(std::abs(mean - 0.3) < 0.0126);
}

TEST_CASE("nb_draw matches the negative binomial moments") {
    std::mt19937_64 rng(mix64(1234));
    for (const auto& [r, theta] : {std::pair{8.0, 0.4}, std::pair{25.0, 0.1}, std::pair{3.0, 0.7}}) {
        const int draws = 10000;
        double sum = 0.0, sum2 = 0.0;
        for (int k = 0; k < draws; ++k) {
            const double v = static_cast<double>(nb_draw(rng, r, theta));
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / draws;
        const double var = sum2 / draws - mean * mean;
        const double true_mean = r * (1.0 - theta) / theta;
        const double true_var = true_mean / theta;
        // three standard errors of the sample mean
        const double se = std::sqrt(true_var / draws);
        CHECK(std::abs(mean - true_mean) < 3.0 * se);
        // variance/mean ratio approximates the overdispersion 1/theta
        CHECK(var / mean == doctest::Approx(1.0 / theta).epsilon(0.1));
    }
}

TEST_CASE("count moments in carrier cells match the component formula") {
    SimSpec spec;
    spec.num_viruses = 4;
    spec.num_columns = 4;
    spec.replicated_animals = 0;
    spec.num_experiments = 1;
    spec.pi_model = PiModel::Shared;
    spec.pi = std::vector<double>{1.0};  // every cell a carrier
    spec.alpha = std::vector<double>{0.2, 0.1, 0.3, 0.05};
    spec.r = std::vector<double>{10.0, 20.0, 5.0, 40.0};
    spec.p = std::vector<double>{0.97};
    // Aggregate draws across seeds: each (i,j) cell gets an independent
    // stream per seed, giving 10^4 draws per cell-parameter pair.
    const int reps = 10000 / 16;
    std::vector<double> sums(16, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
        spec.seed = 1000 + rep;
        const SimData sim = simulate(spec);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                sums[i * 4 + j] += static_cast<double>(sim.counts.counts(i, j));
    }
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const double a = (*spec.alpha)[i];
            const double mean = sums[i * 4 + j] / reps;
            const double true_mean = (*spec.r)[j] * (1.0 - a) / a;
            const double se = std::sqrt(true_mean / a / reps);
            CHECK(std::abs(mean - true_mean) < 3.0 * se);
        }
}

TEST_CASE("spec validation") {
    SimSpec spec;
    spec.num_columns = 4;
    spec.replicated_animals = 4;  // would leave no unique animals
    CHECK_THROWS_AS(simulate(spec), ValidationError);
    spec.replicated_animals = 0;
    spec.alpha = std::vector<double>(3, 0.1);  // wrong length
    CHECK_THROWS_AS(simulate(spec), ValidationError);
}
