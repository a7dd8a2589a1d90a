#include "ervmix/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ervmix {

namespace {

using kernels::Exec;
using kernels::FitData;
using kernels::ParamLogs;

constexpr double kAscentSlack = 1e-9;

MatrixD initial_posterior(const CountMatrix& cm, double divisor_c) {
    MatrixD z(cm.num_viruses(), cm.num_columns());
    for (std::size_t i = 0; i < cm.num_viruses(); ++i)
        for (std::size_t j = 0; j < cm.num_columns(); ++j)
            z(i, j) = std::min(1.0, static_cast<double>(cm.counts(i, j)) / divisor_c);
    return z;
}

double observed_loglik(const Exec& ex, const FitData& fd, const MixtureParams& params,
                       const ParamLogs& logs) {
    return kernels::loglik_binom_part(ex, fd, params.r) +
           kernels::loglik_mixture_part(ex, fd, params, logs);
}

}  // namespace

std::pair<MixtureParams, PosteriorMatrix> init_state(const CountMatrix& cm,
                                                     const CohortMetadata& meta,
                                                     const FitConfig& cfg) {
    cfg.validate();
    const FitData fd = FitData::build(cm, meta, cfg.replicate_mode);
    const Exec ex{cfg.threads};

    PosteriorMatrix post{initial_posterior(cm, cfg.init_divisor_c)};
    MixtureParams params;
    params.pi_model = cfg.pi_model;
    params.r.assign(cm.num_columns(), cfg.init_r0);
    params.alpha = kernels::alpha_update(ex, fd, post.z, params.r, cfg.alpha_smoothing_num,
                                         cfg.alpha_smoothing_den)
                       .smoothed;
    const std::vector<double> p_seed(meta.num_experiments(), 0.5);
    params.p = kernels::p_update(ex, fd, post.z, params.r, p_seed).p;
    params.pi = kernels::pi_update(ex, fd, post.z, cfg.pi_model);
    return {std::move(params), std::move(post)};
}

PosteriorMatrix e_step(const CountMatrix& cm, const CohortMetadata& meta, ReplicateMode mode,
                       const MixtureParams& params) {
    const FitData fd = FitData::build(cm, meta, mode);
    params.validate(cm.num_viruses(), cm.num_columns(), meta.num_experiments());
    ParamLogs logs;
    logs.refresh_alpha(params.alpha);
    logs.refresh_p(params.p);
    PosteriorMatrix post{MatrixD(cm.num_viruses(), cm.num_columns())};
    int defaulted = 0;
    kernels::e_step(Exec{1}, fd, params, logs, post.z, &defaulted);
    return post;
}

kernels::AlphaUpdate cm_step_alpha(const CountMatrix& cm, const MatrixD& z,
                                   std::span<const double> r, double add_num, double add_den) {
    const FitData fd = FitData::build(cm, CohortMetadata::trivial(cm.num_columns()),
                                      ReplicateMode::Independent);
    return kernels::alpha_update(Exec{1}, fd, z, r, add_num, add_den);
}

kernels::PUpdate cm_step_p(const CountMatrix& cm, const CohortMetadata& meta, const MatrixD& z,
                           std::span<const double> r, std::span<const double> p_in) {
    const FitData fd = FitData::build(cm, meta, ReplicateMode::Independent);
    return kernels::p_update(Exec{1}, fd, z, r, p_in);
}

kernels::RUpdate cm_step_r(const CountMatrix& cm, const CohortMetadata& meta, const MatrixD& z,
                           std::span<const double> alpha, std::span<const double> p,
                           std::span<const double> r_in) {
    const FitData fd = FitData::build(cm, meta, ReplicateMode::Independent);
    ParamLogs logs;
    logs.refresh_alpha(alpha);
    logs.refresh_p(p);
    return kernels::r_update(Exec{1}, fd, z, logs, r_in);
}

std::vector<double> cm_step_pi(const MatrixD& z, const CountMatrix& cm, const CohortMetadata& meta,
                               const FitConfig& cfg) {
    const FitData fd = FitData::build(cm, meta, cfg.replicate_mode);
    return kernels::pi_update(Exec{cfg.threads}, fd, z, cfg.pi_model);
}

double observed_log_likelihood(const CountMatrix& cm, const CohortMetadata& meta,
                               ReplicateMode mode, const MixtureParams& params) {
    const FitData fd = FitData::build(cm, meta, mode);
    params.validate(cm.num_viruses(), cm.num_columns(), meta.num_experiments());
    ParamLogs logs;
    logs.refresh_alpha(params.alpha);
    logs.refresh_p(params.p);
    return observed_loglik(Exec{1}, fd, params, logs);
}

FitResult fit(const CountMatrix& cm, const CohortMetadata& meta, const FitConfig& cfg) {
    cfg.validate();
    const FitData fd = FitData::build(cm, meta, cfg.replicate_mode);
    const Exec ex{cfg.threads};

    FitResult res;
    {
        auto [params, post] = init_state(cm, meta, cfg);
        res.params = std::move(params);
        res.posterior = std::move(post);
    }
    MixtureParams& params = res.params;
    MatrixD& z = res.posterior.z;

    ParamLogs logs;
    logs.refresh_alpha(params.alpha);
    logs.refresh_p(params.p);
    double binom_part = kernels::loglik_binom_part(ex, fd, params.r);
    double loglik = binom_part + kernels::loglik_mixture_part(ex, fd, params, logs);
    if (!std::isfinite(loglik))
        throw std::runtime_error("non-finite log-likelihood at initialization");
    res.loglik_trace.push_back(loglik);

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        res.iterations = iter;
        const double dz = kernels::e_step(ex, fd, params, logs, z, &res.posterior_default_count);
        if (dz < cfg.z_change_tolerance) {
            res.converged = true;
            break;
        }

        // Iteration-incoming values, kept in case the pass is rerun with the
        // exact alpha update.
        const std::vector<double> r_in = params.r;
        const std::vector<double> p_in = params.p;

        const auto au = kernels::alpha_update(ex, fd, z, r_in, cfg.alpha_smoothing_num,
                                              cfg.alpha_smoothing_den);
        params.alpha = au.smoothed;
        logs.refresh_alpha(params.alpha);
        bool used_exact = false;
        if (binom_part + kernels::loglik_mixture_part(ex, fd, params, logs) <
            loglik - kAscentSlack) {
            params.alpha = au.exact;
            logs.refresh_alpha(params.alpha);
            used_exact = true;
        }

        // The p and pi updates do not involve alpha; only the r update has to
        // be redone if the guard later swaps the alpha choice.
        const auto pu = kernels::p_update(ex, fd, z, r_in, p_in);
        params.p = pu.p;
        logs.refresh_p(params.p);

        int r_hits = 0;
        const auto run_r_and_pi = [&]() {
            auto ru = kernels::r_update(ex, fd, z, logs, r_in);
            params.r = std::move(ru.r);
            binom_part = kernels::loglik_binom_part(ex, fd, params.r);
            params.pi = kernels::pi_update(ex, fd, z, cfg.pi_model);
            r_hits = ru.boundary_hits;
            return binom_part + kernels::loglik_mixture_part(ex, fd, params, logs);
        };

        double new_loglik = run_r_and_pi();
        if (!used_exact && new_loglik < loglik - kAscentSlack) {
            // The smoothed alpha broke the ascent further down the pass; redo
            // from the exact update, which restores the ECM ascent guarantee.
            params.alpha = au.exact;
            logs.refresh_alpha(params.alpha);
            used_exact = true;
            new_loglik = run_r_and_pi();
        }
        if (used_exact) ++res.ascent_guard_activations;
        res.alpha_clamp_count += au.exact_clamps;
        res.p_clamp_count += pu.clamps;
        res.r_boundary_count += r_hits;

        if (!std::isfinite(new_loglik)) {
            const char* stage = std::abs(binom_part) == std::numeric_limits<double>::infinity()
                                    ? "binomial-coefficient"
                                    : "mixture";
            throw std::runtime_error("non-finite log-likelihood (" + std::string(stage) +
                                     " part) at iteration " + std::to_string(iter));
        }
        loglik = new_loglik;
        res.loglik_trace.push_back(loglik);
    }

    res.constraint_ok = *std::max_element(params.alpha.begin(), params.alpha.end()) <
                        *std::min_element(params.p.begin(), params.p.end());
    return res;
}

}  // namespace ervmix
