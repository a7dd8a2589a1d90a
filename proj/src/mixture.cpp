#include "ervmix/mixture.hpp"

#include <stdexcept>

namespace ervmix {

const char* to_string(PiModel model) {
    switch (model) {
        case PiModel::Shared: return "shared";
        case PiModel::PerVirus: return "per-virus";
        default: return "per-animal";
    }
}

const char* to_string(ReplicateMode mode) {
    return mode == ReplicateMode::Independent ? "independent" : "identical";
}

PiModel pi_model_from_string(const std::string& s) {
    if (s == "shared") return PiModel::Shared;
    if (s == "per-virus") return PiModel::PerVirus;
    if (s == "per-animal") return PiModel::PerAnimal;
    throw std::invalid_argument("unknown pi model '" + s + "'");
}

ReplicateMode replicate_mode_from_string(const std::string& s) {
    if (s == "independent") return ReplicateMode::Independent;
    if (s == "identical") return ReplicateMode::Identical;
    throw std::invalid_argument("unknown replicate mode '" + s + "'");
}

void FitConfig::validate() const {
    if (!(init_divisor_c > 0)) throw std::invalid_argument("init_divisor_c must be positive");
    if (!(init_r0 > 0)) throw std::invalid_argument("init_r0 must be positive");
    if (!(z_change_tolerance > 0)) throw std::invalid_argument("z_change_tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    if (alpha_smoothing_num < 0 || alpha_smoothing_den < 0)
        throw std::invalid_argument("alpha smoothing constants must be non-negative");
    if (threads < 0) throw std::invalid_argument("threads must be non-negative");
}

void MixtureParams::validate(std::size_t m, std::size_t n, std::size_t K) const {
    const std::size_t expect_pi =
        pi_model == PiModel::Shared ? 1 : (pi_model == PiModel::PerVirus ? m : n);
    if (pi.size() != expect_pi) throw std::invalid_argument("pi vector has wrong length");
    if (r.size() != n || alpha.size() != m || p.size() != K)
        throw std::invalid_argument("parameter vector has wrong length");
    for (double v : pi)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("pi outside [0,1]");
    for (double v : r)
        if (!(v > 0.0)) throw std::invalid_argument("r must be positive");
    for (double v : alpha)
        if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("alpha outside (0,1)");
    for (double v : p)
        if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("p outside (0,1)");
}

}  // namespace ervmix
