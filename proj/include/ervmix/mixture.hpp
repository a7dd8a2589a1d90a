#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ervmix/matrix.hpp"

namespace ervmix {

// Parameterization of the prior carriage probability pi_ij.
enum class PiModel { Shared, PerVirus, PerAnimal };

// Whether replicate columns of the same animal are tied together in the
// likelihood or treated as independent samples.
enum class ReplicateMode { Independent, Identical };

const char* to_string(PiModel model);
const char* to_string(ReplicateMode mode);
PiModel pi_model_from_string(const std::string& s);           // shared | per-virus | per-animal
ReplicateMode replicate_mode_from_string(const std::string& s);  // independent | identical

struct FitConfig {
    PiModel pi_model = PiModel::PerVirus;
    ReplicateMode replicate_mode = ReplicateMode::Identical;
    double init_divisor_c = 10.0;     // Z0 = min(1, x / c)
    double init_r0 = 100.0;
    double z_change_tolerance = 0.01; // stop when sum |dZ| drops below this
    int max_iterations = 2000;
    double alpha_smoothing_num = 0.05;
    double alpha_smoothing_den = 0.10;
    int threads = 0;                  // 0 = all cores, 1 = serial reference path

    void validate() const;
};

struct MixtureParams {
    PiModel pi_model = PiModel::PerVirus;
    std::vector<double> pi;     // 1 | m | n values depending on pi_model
    std::vector<double> r;      // n, positive
    std::vector<double> alpha;  // m, in (0,1)
    std::vector<double> p;      // K, in (0,1)

    double pi_at(std::size_t i, std::size_t j) const {
        switch (pi_model) {
            case PiModel::Shared: return pi[0];
            case PiModel::PerVirus: return pi[i];
            default: return pi[j];
        }
    }
    void validate(std::size_t m, std::size_t n, std::size_t K) const;
};

// Posterior carriage probabilities Z(i,j); under ReplicateMode::Identical
// all columns of a replicate group carry identical rows.
struct PosteriorMatrix {
    MatrixD z;
};

struct FitResult {
    MixtureParams params;
    PosteriorMatrix posterior;
    std::vector<double> loglik_trace;  // initial value plus one entry per iteration
    int iterations = 0;
    bool converged = false;
    bool constraint_ok = false;        // max_i alpha_i < min_k p_k at the fit
    int ascent_guard_activations = 0;
    int alpha_clamp_count = 0;
    int p_clamp_count = 0;
    int r_boundary_count = 0;
    int posterior_default_count = 0;   // cells where both component masses vanished

    double final_loglik() const { return loglik_trace.back(); }
};

}  // namespace ervmix
