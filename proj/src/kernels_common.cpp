#include <cmath>
#include <limits>

#include "ervmix/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ervmix::kernels {

FitData FitData::build(const CountMatrix& cm, const CohortMetadata& meta, ReplicateMode mode) {
    cm.validate();
    meta.validate(cm.num_columns());
    const std::size_t m = cm.num_viruses();
    const std::size_t n = cm.num_columns();

    FitData fd;
    fd.counts = &cm.counts;
    fd.experiment_of_column = meta.experiment_of_column;
    fd.num_experiments = meta.num_experiments();

    if (mode == ReplicateMode::Independent) {
        fd.group_offsets.resize(n + 1);
        fd.group_columns.resize(n);
        fd.representative.resize(n);
        fd.group_of_column.resize(n);
        for (std::size_t j = 0; j <= n; ++j) fd.group_offsets[j] = static_cast<int>(j);
        for (std::size_t j = 0; j < n; ++j) {
            fd.group_columns[j] = static_cast<int>(j);
            fd.representative[j] = static_cast<int>(j);
            fd.group_of_column[j] = static_cast<int>(j);
        }
    } else {
        fd.group_of_column = meta.group_of_column;
        fd.group_offsets.push_back(0);
        for (const auto& members : meta.replicate_groups) {
            for (int j : members) fd.group_columns.push_back(j);
            fd.group_offsets.push_back(static_cast<int>(fd.group_columns.size()));
            fd.representative.push_back(members.front());
        }
    }

    fd.row_nnz_offsets.assign(m + 1, 0);
    fd.col_nnz_offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (cm.counts(i, j) != 0) {
                ++fd.row_nnz_offsets[i + 1];
                ++fd.col_nnz_offsets[j + 1];
            }
    for (std::size_t i = 0; i < m; ++i) fd.row_nnz_offsets[i + 1] += fd.row_nnz_offsets[i];
    for (std::size_t j = 0; j < n; ++j) fd.col_nnz_offsets[j + 1] += fd.col_nnz_offsets[j];
    fd.row_nnz_cols.resize(fd.row_nnz_offsets[m]);
    fd.col_nnz_rows.resize(fd.col_nnz_offsets[n]);
    auto row_fill = fd.row_nnz_offsets;
    auto col_fill = fd.col_nnz_offsets;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (cm.counts(i, j) != 0) {
                fd.row_nnz_cols[row_fill[i]++] = static_cast<int>(j);
                fd.col_nnz_rows[col_fill[j]++] = static_cast<int>(i);
            }
    return fd;
}

void ParamLogs::refresh_alpha(std::span<const double> alpha) {
    log_alpha.resize(alpha.size());
    log1m_alpha.resize(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        log_alpha[i] = std::log(alpha[i]);
        log1m_alpha[i] = std::log1p(-alpha[i]);
    }
}

void ParamLogs::refresh_p(std::span<const double> p) {
    log_p.resize(p.size());
    log1m_p.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        log_p[k] = std::log(p[k]);
        log1m_p[k] = std::log1p(-p[k]);
    }
}

int Exec::resolved_threads() const {
#ifdef _OPENMP
    return threads <= 0 ? omp_get_max_threads() : threads;
#else
    return 1;
#endif
}

double component_posterior(double pi, double log_f, double log_g) {
    if (pi <= 0.0) return 0.0;
    if (pi >= 1.0) return 1.0;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    if (log_f == neg_inf && log_g == neg_inf) return pi;
    if (log_f == neg_inf) return 0.0;
    if (log_g == neg_inf) return 1.0;
    const double t = std::log(pi) - std::log1p(-pi) + (log_f - log_g);
    if (!std::isfinite(t)) return pi;
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double e_step(const Exec& ex, const FitData& fd, const MixtureParams& params, const ParamLogs& logs,
              MatrixD& z, int* defaulted) {
    return ex.use_serial() ? serial::e_step(fd, params, logs, z, defaulted)
                           : par::e_step(fd, params, logs, z, defaulted, ex.resolved_threads());
}

AlphaUpdate alpha_update(const Exec& ex, const FitData& fd, const MatrixD& z,
                         std::span<const double> r, double add_num, double add_den) {
    return ex.use_serial() ? serial::alpha_update(fd, z, r, add_num, add_den)
                           : par::alpha_update(fd, z, r, add_num, add_den, ex.resolved_threads());
}

PUpdate p_update(const Exec& ex, const FitData& fd, const MatrixD& z, std::span<const double> r,
                 std::span<const double> p_in) {
    return ex.use_serial() ? serial::p_update(fd, z, r, p_in)
                           : par::p_update(fd, z, r, p_in, ex.resolved_threads());
}

RUpdate r_update(const Exec& ex, const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                 std::span<const double> r_in) {
    return ex.use_serial() ? serial::r_update(fd, z, logs, r_in)
                           : par::r_update(fd, z, logs, r_in, ex.resolved_threads());
}

std::vector<double> pi_update(const Exec& ex, const FitData& fd, const MatrixD& z, PiModel model) {
    return ex.use_serial() ? serial::pi_update(fd, z, model)
                           : par::pi_update(fd, z, model, ex.resolved_threads());
}

double loglik_binom_part(const Exec& ex, const FitData& fd, std::span<const double> r) {
    return ex.use_serial() ? serial::loglik_binom_part(fd, r)
                           : par::loglik_binom_part(fd, r, ex.resolved_threads());
}

double loglik_mixture_part(const Exec& ex, const FitData& fd, const MixtureParams& params,
                           const ParamLogs& logs) {
    return ex.use_serial() ? serial::loglik_mixture_part(fd, params, logs)
                           : par::loglik_mixture_part(fd, params, logs, ex.resolved_threads());
}

}  // namespace ervmix::kernels
