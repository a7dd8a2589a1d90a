#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ervmix/model_selection.hpp"
#include "ervmix/simulator.hpp"

using namespace ervmix;

TEST_CASE("parameter counts match the closed forms") {
    // The published study dimensions: 1722 viruses, 77 columns, 3 experiments.
    CHECK(count_parameters(PiModel::Shared, 1722, 77, 3) == 1803);
    CHECK(count_parameters(PiModel::PerVirus, 1722, 77, 3) == 3524);
    CHECK(count_parameters(PiModel::PerAnimal, 1722, 77, 3) == 1879);

    std::mt19937_64 rng(9);
    for (int it = 0; it < 50; ++it) {
        const long m = 1 + static_cast<long>(rng() % 3000);
        const long n = 1 + static_cast<long>(rng() % 200);
        const long K = 1 + static_cast<long>(rng() % 5);
        CHECK(count_parameters(PiModel::Shared, m, n, K) == m + n + K + 1);
        CHECK(count_parameters(PiModel::PerVirus, m, n, K) == 2 * m + n + K);
        CHECK(count_parameters(PiModel::PerAnimal, m, n, K) == m + 2 * n + K);
    }
}

TEST_CASE("bic arithmetic") {
    CHECK(bic(0.0, 1, 2, 5).paper == doctest::Approx(0.0));
    CHECK(bic(-100.0, 3, 1, 2).paper == doctest::Approx(200.0 + 2.0 * std::log(3.0)));
    CHECK(bic(-100.0, 3, 1, 2).standard == doctest::Approx(200.0 + 3.0 * std::log(2.0)));
    // strictly decreasing in the log-likelihood at fixed d, mn
    const double b1 = bic(-50.0, 7, 10, 4).paper;
    const double b2 = bic(-49.0, 7, 10, 4).paper;
    CHECK(b2 < b1);
    CHECK(bic(-49.0, 7, 10, 4).standard < bic(-50.0, 7, 10, 4).standard);
    CHECK_THROWS(bic(0.0, 0, 2, 2));
}

namespace {

SimData heterogeneous_sim(std::uint64_t seed) {
    SimSpec spec;
    spec.num_viruses = 120;
    spec.num_columns = 30;
    spec.num_experiments = 2;
    spec.replicated_animals = 0;
    spec.pi_model = PiModel::PerVirus;
    std::vector<double> pi(spec.num_viruses);
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = i % 2 == 0 ? 0.05 : 0.9;
    spec.pi = pi;
    spec.seed = seed;
    return simulate(spec);
}

SimData constant_sim(std::uint64_t seed) {
    SimSpec spec;
    spec.num_viruses = 120;
    spec.num_columns = 30;
    spec.num_experiments = 2;
    spec.replicated_animals = 0;
    spec.pi_model = PiModel::Shared;
    spec.pi = std::vector<double>{0.3};
    spec.seed = seed;
    return simulate(spec);
}

FitConfig quick_cfg() {
    FitConfig cfg;
    cfg.replicate_mode = ReplicateMode::Independent;
    cfg.threads = 0;
    return cfg;
}

}  // namespace

TEST_CASE("select_model returns three ranked scores and a winner") {
    const SimData sim = heterogeneous_sim(17);
    const SelectionResult sel = select_model(sim.counts, sim.meta, quick_cfg());
    REQUIRE(sel.scores.size() == 3);
    CHECK(sel.scores[0].bic_paper <= sel.scores[1].bic_paper);
    CHECK(sel.scores[1].bic_paper <= sel.scores[2].bic_paper);
    CHECK(sel.scores[0].pi_model == sel.best_model);
    CHECK(sel.best_fit.final_loglik() == sel.scores[0].loglik);

    SUBCASE("per-virus wins on strongly heterogeneous prevalences") {
        CHECK(sel.best_model == PiModel::PerVirus);
    }
    SUBCASE("shared wins on constant prevalence") {
        const SimData flat = constant_sim(18);
        const SelectionResult sel2 = select_model(flat.counts, flat.meta, quick_cfg());
        CHECK(sel2.best_model == PiModel::Shared);
    }
}

TEST_CASE("the per-virus likelihood dominates the shared one (nesting)") {
    for (const std::uint64_t seed : {5ull, 6ull, 7ull}) {
        const SimData sim = constant_sim(seed);
        const SelectionResult sel = select_model(sim.counts, sim.meta, quick_cfg());
        double ll_shared = 0, ll_pv = 0;
        for (const auto& s : sel.scores) {
            if (s.pi_model == PiModel::Shared) ll_shared = s.loglik;
            if (s.pi_model == PiModel::PerVirus) ll_pv = s.loglik;
        }
        CHECK(ll_pv >= ll_shared - 1e-6);
    }
}

TEST_CASE("ranking key can switch to the conventional penalty") {
    const SimData sim = heterogeneous_sim(23);
    const SelectionResult sel = select_model(sim.counts, sim.meta, quick_cfg(), true);
    CHECK(sel.scores[0].bic_standard <= sel.scores[1].bic_standard);
    CHECK(sel.scores[1].bic_standard <= sel.scores[2].bic_standard);
}
