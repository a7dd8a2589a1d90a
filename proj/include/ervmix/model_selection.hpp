#pragma once

#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/ecm.hpp"
#include "ervmix/mixture.hpp"

namespace ervmix {

// Free parameters of a fit: m alphas + n rs + K ps + the pi block.
long count_parameters(PiModel model, std::size_t m, std::size_t n, std::size_t K);

struct BicPair {
    double paper;     // -2 loglik + mn log d
    double standard;  // -2 loglik + d log(mn)
};

BicPair bic(double loglik, long d, std::size_t m, std::size_t n);

struct ModelScore {
    PiModel pi_model;
    ReplicateMode replicate_mode;
    long d = 0;
    double loglik = 0;
    double bic_paper = 0;
    double bic_standard = 0;
};

struct SelectionResult {
    std::vector<ModelScore> scores;  // ascending by the ranking key, ties by smaller d
    PiModel best_model;
    FitResult best_fit;
};

// Fits all three pi parameterizations under base.replicate_mode and ranks
// them, by bic_paper unless rank_by_standard is set.
SelectionResult select_model(const CountMatrix& cm, const CohortMetadata& meta,
                             const FitConfig& base, bool rank_by_standard = false);

}  // namespace ervmix
