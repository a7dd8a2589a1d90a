#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/matrix.hpp"
#include "ervmix/mixture.hpp"

// Data-parallel kernels for one ECM iteration. Every kernel exists in two
// backends with the same signature: kernels::serial holds the plain-loop
// reference implementation, kernels::par the OpenMP one. Both share the
// per-element arithmetic, and any cross-element reduction accumulates
// per-row/per-column partials that are then summed in a fixed order, so the
// two backends produce bit-identical results for any thread count.
namespace ervmix::kernels {

// Search bracket and relative tolerance for the numerical r update.
inline constexpr double kRMin = 1e-6;
inline constexpr double kRMax = 1e7;
inline constexpr double kRRelTol = 1e-8;

// Clamp bound keeping probability parameters away from {0, 1}.
inline constexpr double kProbFloor = 1e-12;

// Problem layout shared by the kernels: the counts plus the replicate and
// experiment structure flattened into index arrays. Under
// ReplicateMode::Independent every column forms its own group. The nonzero
// index is kept both by row and by column since log-binomial terms vanish
// at x = 0 and the matrices are mostly zeros.
struct FitData {
    const Matrix<std::int64_t>* counts = nullptr;  // m x n
    std::vector<int> group_offsets;                // G+1, CSR into group_columns
    std::vector<int> group_columns;                // member columns, grouped
    std::vector<int> representative;               // per group, lowest member
    std::vector<int> group_of_column;              // n
    std::vector<int> experiment_of_column;         // n
    int num_experiments = 0;
    std::vector<std::size_t> row_nnz_offsets;      // m+1
    std::vector<int> row_nnz_cols;
    std::vector<std::size_t> col_nnz_offsets;      // n+1
    std::vector<int> col_nnz_rows;

    std::size_t num_viruses() const { return counts->rows(); }
    std::size_t num_columns() const { return counts->cols(); }
    std::size_t num_groups() const { return representative.size(); }

    static FitData build(const CountMatrix& cm, const CohortMetadata& meta, ReplicateMode mode);
};

// Per-iteration caches of the parameter logarithms.
struct ParamLogs {
    std::vector<double> log_alpha, log1m_alpha;  // m
    std::vector<double> log_p, log1m_p;          // K

    void refresh_alpha(std::span<const double> alpha);
    void refresh_p(std::span<const double> p);
};

struct AlphaUpdate {
    std::vector<double> smoothed;  // always interior to (0,1)
    std::vector<double> exact;     // clamped into [kProbFloor, 1-kProbFloor]
    int exact_clamps = 0;
};

struct PUpdate {
    std::vector<double> p;
    int clamps = 0;  // boundary clamps plus zero-information holds
};

struct RUpdate {
    std::vector<double> r;
    int boundary_hits = 0;
};

// Backend selection: threads == 1 runs the serial reference, anything else
// the OpenMP backend (0 = all hardware threads).
struct Exec {
    int threads = 1;
    bool use_serial() const { return threads == 1; }
    int resolved_threads() const;
};

// Posterior carriage probability for one (virus, group) pair given the
// mixing weight and the two component log-masses; defaults to pi when both
// masses vanish.
double component_posterior(double pi, double log_f, double log_g);

namespace serial {
double e_step(const FitData& fd, const MixtureParams& params, const ParamLogs& logs, MatrixD& z,
              int* defaulted);
AlphaUpdate alpha_update(const FitData& fd, const MatrixD& z, std::span<const double> r,
                         double add_num, double add_den);
PUpdate p_update(const FitData& fd, const MatrixD& z, std::span<const double> r,
                 std::span<const double> p_in);
RUpdate r_update(const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                 std::span<const double> r_in);
std::vector<double> pi_update(const FitData& fd, const MatrixD& z, PiModel model);
double loglik_binom_part(const FitData& fd, std::span<const double> r);
double loglik_mixture_part(const FitData& fd, const MixtureParams& params, const ParamLogs& logs);
}  // namespace serial

namespace par {
double e_step(const FitData& fd, const MixtureParams& params, const ParamLogs& logs, MatrixD& z,
              int* defaulted, int threads);
AlphaUpdate alpha_update(const FitData& fd, const MatrixD& z, std::span<const double> r,
                         double add_num, double add_den, int threads);
PUpdate p_update(const FitData& fd, const MatrixD& z, std::span<const double> r,
                 std::span<const double> p_in, int threads);
RUpdate r_update(const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                 std::span<const double> r_in, int threads);
std::vector<double> pi_update(const FitData& fd, const MatrixD& z, PiModel model, int threads);
double loglik_binom_part(const FitData& fd, std::span<const double> r, int threads);
double loglik_mixture_part(const FitData& fd, const MixtureParams& params, const ParamLogs& logs,
                           int threads);
}  // namespace par

// Dispatchers picking the backend from `ex`.
double e_step(const Exec& ex, const FitData& fd, const MixtureParams& params, const ParamLogs& logs,
              MatrixD& z, int* defaulted);
AlphaUpdate alpha_update(const Exec& ex, const FitData& fd, const MatrixD& z,
                         std::span<const double> r, double add_num, double add_den);
PUpdate p_update(const Exec& ex, const FitData& fd, const MatrixD& z, std::span<const double> r,
                 std::span<const double> p_in);
RUpdate r_update(const Exec& ex, const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                 std::span<const double> r_in);
std::vector<double> pi_update(const Exec& ex, const FitData& fd, const MatrixD& z, PiModel model);
double loglik_binom_part(const Exec& ex, const FitData& fd, std::span<const double> r);
double loglik_mixture_part(const Exec& ex, const FitData& fd, const MixtureParams& params,
                           const ParamLogs& logs);

}  // namespace ervmix::kernels
