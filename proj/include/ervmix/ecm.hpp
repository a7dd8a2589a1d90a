#pragma once

#include <span>
#include <utility>

#include "ervmix/count_data.hpp"
#include "ervmix/kernels.hpp"
#include "ervmix/mixture.hpp"

namespace ervmix {

// Initial state: Z0 = min(1, x/c), r = r0, and alpha/p/pi from one
// conditional-maximization pass over Z0 (r stays at r0).
std::pair<MixtureParams, PosteriorMatrix> init_state(const CountMatrix& cm,
                                                     const CohortMetadata& meta,
                                                     const FitConfig& cfg);

// Posterior carriage probabilities at the given parameters; replicate-group
// posteriors are broadcast to all member columns under Identical mode.
PosteriorMatrix e_step(const CountMatrix& cm, const CohortMetadata& meta, ReplicateMode mode,
                       const MixtureParams& params);

// Conditional-maximization steps. Each returns exactly what the fitter uses;
// alpha exposes both the smoothed and the exact update for the ascent guard,
// r never returns a point whose objective is below the incoming one.
kernels::AlphaUpdate cm_step_alpha(const CountMatrix& cm, const MatrixD& z,
                                   std::span<const double> r, double add_num = 0.05,
                                   double add_den = 0.10);
kernels::PUpdate cm_step_p(const CountMatrix& cm, const CohortMetadata& meta, const MatrixD& z,
                           std::span<const double> r, std::span<const double> p_in);
kernels::RUpdate cm_step_r(const CountMatrix& cm, const CohortMetadata& meta, const MatrixD& z,
                           std::span<const double> alpha, std::span<const double> p,
                           std::span<const double> r_in);
std::vector<double> cm_step_pi(const MatrixD& z, const CountMatrix& cm, const CohortMetadata& meta,
                               const FitConfig& cfg);

// Log of the observed-data likelihood, computed cell-by-cell in log space.
double observed_log_likelihood(const CountMatrix& cm, const CohortMetadata& meta,
                               ReplicateMode mode, const MixtureParams& params);

// Full ECM fit: E-step then the alpha, p, r, pi conditional maximizations,
// stopping when the summed absolute posterior change falls below the
// configured tolerance. If the smoothed alpha update would decrease the
// observed log-likelihood the exact update is substituted for the iteration.
FitResult fit(const CountMatrix& cm, const CohortMetadata& meta, const FitConfig& cfg);

}  // namespace ervmix
