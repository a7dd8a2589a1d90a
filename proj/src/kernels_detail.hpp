#pragma once

// Per-element arithmetic shared by the serial and OpenMP kernel backends.
// Everything here computes one row's or one column's contribution with a
// fixed-order inner loop, which is what makes the two backends bit-identical.

#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "ervmix/kernels.hpp"
#include "num_util.hpp"

namespace ervmix::kernels::detail {

inline double posterior_from_delta(double pi, double delta) {
    if (pi <= 0.0) return 0.0;
    if (pi >= 1.0) return 1.0;
    const double t = std::log(pi) - std::log1p(-pi) + delta;
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Posterior row for virus i; zrow is read (previous values) and overwritten.
// Returns the row's sum of |dZ|; *defaulted counts group cells where the
// log-odds came out non-finite and the posterior fell back to pi.
inline double row_e_step(const FitData& fd, const MixtureParams& params, const ParamLogs& logs,
                         std::size_t i, double* zrow, int* defaulted) {
    const auto& counts = *fd.counts;
    const double la = logs.log_alpha[i];
    const double l1a = logs.log1m_alpha[i];
    double dz = 0.0;
    for (std::size_t g = 0; g < fd.num_groups(); ++g) {
        double delta = 0.0;  // log f-product minus log g-product, binomials cancel
        for (int idx = fd.group_offsets[g]; idx < fd.group_offsets[g + 1]; ++idx) {
            const int j = fd.group_columns[idx];
            const int k = fd.experiment_of_column[j];
            const double x = static_cast<double>(counts(i, j));
            delta += params.r[j] * (la - logs.log_p[k]) + x * (l1a - logs.log1m_p[k]);
        }
        const double pi = params.pi_at(i, fd.representative[g]);
        double z;
        if (std::isfinite(delta)) {
            z = posterior_from_delta(pi, delta);
        } else {
            z = pi;
            ++*defaulted;
        }
        for (int idx = fd.group_offsets[g]; idx < fd.group_offsets[g + 1]; ++idx) {
            const int j = fd.group_columns[idx];
            dz += std::abs(z - zrow[j]);
            zrow[j] = z;
        }
    }
    return dz;
}

// Sufficient statistics of the alpha update for virus i:
// num = sum_j Z r_j, den = sum_j Z (x + r_j).
inline void row_alpha_sums(const FitData& fd, const MatrixD& z, std::span<const double> r,
                           std::size_t i, double& num, double& den) {
    const auto& counts = *fd.counts;
    const double* zrow = z.row(i);
    num = 0.0;
    den = 0.0;
    for (std::size_t j = 0; j < fd.num_columns(); ++j) {
        const double w = zrow[j];
        num += w * r[j];
        den += w * (static_cast<double>(counts(i, j)) + r[j]);
    }
}

// Column j's contribution to its experiment's p update:
// num = sum_i (1-Z) r_j, den = sum_i (1-Z)(x + r_j).
inline void col_p_partial(const FitData& fd, const MatrixD& z, std::span<const double> r,
                          std::size_t j, double& num, double& den) {
    const auto& counts = *fd.counts;
    double sum_w = 0.0, sum_wx = 0.0;
    for (std::size_t i = 0; i < fd.num_viruses(); ++i) {
        const double w = 1.0 - z(i, j);
        sum_w += w;
        sum_wx += w * static_cast<double>(counts(i, j));
    }
    num = r[j] * sum_w;
    den = sum_wx + r[j] * sum_w;
}


// Conditional objective of the r update for column j, up to terms constant
// in r: sum over nonzero cells of [lgamma(x+r) - lgamma(r)] plus
// r * sum_i [Z log alpha_i + (1-Z) log p_k(j)].
inline double col_r_weight(const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                           std::size_t j) {
    const double lp = logs.log_p[fd.experiment_of_column[j]];
    double s = 0.0;
    for (std::size_t i = 0; i < fd.num_viruses(); ++i) {
        const double zi = z(i, j);
        s += zi * logs.log_alpha[i] + (1.0 - zi) * lp;
    }
    return s;
}

inline double col_r_objective(const FitData& fd, std::size_t j, double s, double r) {
    const auto& counts = *fd.counts;
    double v = r * s;
    const std::size_t lo = fd.col_nnz_offsets[j], hi = fd.col_nnz_offsets[j + 1];
    for (std::size_t idx = lo; idx < hi; ++idx)
        v += std::lgamma(static_cast<double>(counts(fd.col_nnz_rows[idx], j)) + r);
    v -= static_cast<double>(hi - lo) * std::lgamma(r);
    return v;
}

// d/dr of the objective; strictly decreasing in r (the objective is concave),
// so a sign bisection pins the interior maximizer.
inline double col_r_derivative(const FitData& fd, std::size_t j, double s, double r) {
    const auto& counts = *fd.counts;
    double v = s;
    const std::size_t lo = fd.col_nnz_offsets[j], hi = fd.col_nnz_offsets[j + 1];
    for (std::size_t idx = lo; idx < hi; ++idx)
        v += num::digamma(static_cast<double>(counts(fd.col_nnz_rows[idx], j)) + r);
    v -= static_cast<double>(hi - lo) * num::digamma(r);
    return v;
}

// Maximizes the r objective over [kRMin, kRMax]: golden section in log r to
// the contract tolerance, then a derivative-sign bisection inside the final
// bracket so the update is idempotent at float resolution. Never moves below
// the objective value at the incoming point.
inline double col_r_maximize(const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                             std::size_t j, double r_in, bool& boundary) {
    const double s = col_r_weight(fd, z, logs, j);
    const auto obj = [&](double t) { return col_r_objective(fd, j, s, std::exp(t)); };
    const auto deriv = [&](double t) { return col_r_derivative(fd, j, s, std::exp(t)); };
    const double tlo = std::log(kRMin), thi = std::log(kRMax);
    const num::GoldenResult g = num::golden_max(obj, tlo, thi, kRRelTol);
    const auto [tstar, fstar] = num::polish_concave_max(g, obj, deriv);
    double r_out = std::exp(tstar);
    if (obj(std::log(r_in)) > fstar) r_out = r_in;
    const double margin = 1e-6;
    const double t_out = std::log(r_out);
    boundary = t_out <= tlo + margin || t_out >= thi - margin;
    return r_out;
}

inline double row_mean_over_representatives(const FitData& fd, const MatrixD& z, std::size_t i) {
    const double* zrow = z.row(i);
    double sum = 0.0;
    for (const int rep : fd.representative) sum += zrow[rep];
    return sum / static_cast<double>(fd.num_groups());
}

inline double col_mean(const FitData& fd, const MatrixD& z, std::size_t j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < fd.num_viruses(); ++i) sum += z(i, j);
    return sum / static_cast<double>(fd.num_viruses());
}

// Log binomial coefficients of row i: sum over nonzero cells of
// lgamma(x + r_j) - lgamma(r_j) - lgamma(x + 1); zero cells contribute 0.
inline double row_loglik_binom(const FitData& fd, std::span<const double> r, std::size_t i) {
    const auto& counts = *fd.counts;
    double v = 0.0;
    for (std::size_t idx = fd.row_nnz_offsets[i]; idx < fd.row_nnz_offsets[i + 1]; ++idx) {
        const int j = fd.row_nnz_cols[idx];
        const double x = static_cast<double>(counts(i, j));
        v += std::lgamma(x + r[j]) - std::lgamma(r[j]) - std::lgamma(x + 1.0);
    }
    return v;
}

inline double lse2(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// Row i's mixture contribution to the observed-data log-likelihood, the
// binomial coefficients excluded (they cancel between components).
inline double row_loglik_mixture(const FitData& fd, const MixtureParams& params,
                                 const ParamLogs& logs, std::size_t i) {
    const auto& counts = *fd.counts;
    const double la = logs.log_alpha[i];
    const double l1a = logs.log1m_alpha[i];
    double v = 0.0;
    for (std::size_t g = 0; g < fd.num_groups(); ++g) {
        double f_sum = 0.0, g_sum = 0.0;
        for (int idx = fd.group_offsets[g]; idx < fd.group_offsets[g + 1]; ++idx) {
            const int j = fd.group_columns[idx];
            const int k = fd.experiment_of_column[j];
            const double x = static_cast<double>(counts(i, j));
            f_sum += params.r[j] * la + x * l1a;
            g_sum += params.r[j] * logs.log_p[k] + x * logs.log1m_p[k];
        }
        const double pi = params.pi_at(i, fd.representative[g]);
        if (pi <= 0.0)
            v += g_sum;
        else if (pi >= 1.0)
            v += f_sum;
        else
            v += lse2(std::log(pi) + f_sum, std::log1p(-pi) + g_sum);
    }
    return v;
}

// Turns one row's sufficient statistics into the smoothed and exact alpha
// values. NaN from 0/0 lands on the low clamp; a zero-information exact
// update falls back to the smoothed value.
inline void finalize_alpha_entry(double num, double den, double add_num, double add_den,
                                 double& smoothed, double& exact, int& clamps) {
    double s = (num + add_num) / (den + add_den);
    if (!(s >= kProbFloor)) {
        s = kProbFloor;
        ++clamps;
    } else if (s > 1.0 - kProbFloor) {
        s = 1.0 - kProbFloor;
        ++clamps;
    }
    smoothed = s;
    if (den > 0.0) {
        double e = num / den;
        if (!(e >= kProbFloor)) {
            e = kProbFloor;
            ++clamps;
        } else if (e > 1.0 - kProbFloor) {
            e = 1.0 - kProbFloor;
            ++clamps;
        }
        exact = e;
    } else {
        exact = s;
    }
}

// Accumulates the per-column partials into per-experiment p values in fixed
// column order. Experiments whose noise-weighted mass vanished keep their
// incoming value.
inline PUpdate combine_p(const FitData& fd, std::span<const double> col_num,
                         std::span<const double> col_den, std::span<const double> p_in) {
    std::vector<double> num(fd.num_experiments, 0.0), den(fd.num_experiments, 0.0);
    for (std::size_t j = 0; j < fd.num_columns(); ++j) {
        const int k = fd.experiment_of_column[j];
        num[k] += col_num[j];
        den[k] += col_den[j];
    }
    PUpdate out;
    out.p.resize(fd.num_experiments);
    for (int k = 0; k < fd.num_experiments; ++k) {
        if (den[k] > 0.0) {
            double p = num[k] / den[k];
            if (!(p >= kProbFloor)) {
                p = kProbFloor;
                ++out.clamps;
            } else if (p > 1.0 - kProbFloor) {
                p = 1.0 - kProbFloor;
                ++out.clamps;
            }
            out.p[k] = p;
        } else {
            out.p[k] = p_in[k];
            ++out.clamps;
        }
    }
    return out;
}

inline double ordered_sum(std::span<const double> parts) {
    double s = 0.0;
    for (const double v : parts) s += v;
    return s;
}

}  // namespace ervmix::kernels::detail
