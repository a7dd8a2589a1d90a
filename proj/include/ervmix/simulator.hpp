#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/mixture.hpp"

namespace ervmix {

// Generative settings for synthetic datasets. Parameter vectors may be
// pinned explicitly; otherwise they are drawn from the stated ranges
// (alpha log-uniformly, the rest uniformly). The last `replicated_animals`
// columns are second sequencing runs of the first animals, placed in a
// different experiment than the original run.
struct SimSpec {
    std::size_t num_viruses = 200;   // m
    std::size_t num_columns = 40;    // n, replicate columns included
    int num_experiments = 2;         // K
    int replicated_animals = 4;
    PiModel pi_model = PiModel::PerVirus;
    std::array<double, 2> alpha_range{0.005, 0.3};
    std::array<double, 2> p_range{0.95, 0.99};
    std::array<double, 2> r_range{5.0, 50.0};
    std::array<double, 2> pi_range{0.1, 0.9};
    std::optional<std::vector<double>> alpha;  // m
    std::optional<std::vector<double>> r;      // n
    std::optional<std::vector<double>> p;      // K
    std::optional<std::vector<double>> pi;     // 1 | m | unique animals
    std::uint64_t seed = 1;

    std::size_t num_unique() const { return num_columns - replicated_animals; }
    void validate() const;
};

struct SimData {
    CountMatrix counts;
    CohortMetadata meta;
    MatrixB truth;              // m x unique animals, carrier indicators
    MixtureParams true_params;  // pi broadcast to columns under PerAnimal
};

// Carrier states are drawn per (virus, unique animal); replicate columns
// share the state and draw their counts independently, from the
// true-positive component if carrier and the noise component otherwise.
// Every cell uses its own counter-derived RNG stream, so output is
// bit-reproducible from the seed regardless of evaluation order.
SimData simulate(const SimSpec& spec);

// One negative binomial draw via the Gamma-Poisson composition, valid for
// non-integer r.
std::int64_t nb_draw(std::mt19937_64& rng, double r, double theta);

// SplitMix64 finalizer used to derive per-cell RNG streams.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ervmix
