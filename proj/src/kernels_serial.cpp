// Serial reference implementations of the ECM iteration kernels. The OpenMP
// backend in kernels_omp.cpp must agree with these bit-for-bit.

#include "kernels_detail.hpp"

namespace ervmix::kernels::serial {

double e_step(const FitData& fd, const MixtureParams& params, const ParamLogs& logs, MatrixD& z,
              int* defaulted) {
    const std::size_t m = fd.num_viruses();
    std::vector<double> row_dz(m);
    std::vector<int> row_def(m, 0);
    for (std::size_t i = 0; i < m; ++i)
        row_dz[i] = detail::row_e_step(fd, params, logs, i, z.row(i), &row_def[i]);
    if (defaulted)
        for (const int d : row_def) *defaulted += d;
    return detail::ordered_sum(row_dz);
}

AlphaUpdate alpha_update(const FitData& fd, const MatrixD& z, std::span<const double> r,
                         double add_num, double add_den) {
    const std::size_t m = fd.num_viruses();
    AlphaUpdate out;
    out.smoothed.resize(m);
    out.exact.resize(m);
    std::vector<int> clamps(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        double num, den;
        detail::row_alpha_sums(fd, z, r, i, num, den);
        detail::finalize_alpha_entry(num, den, add_num, add_den, out.smoothed[i], out.exact[i],
                                     clamps[i]);
    }
    for (const int c : clamps) out.exact_clamps += c;
    return out;
}

PUpdate p_update(const FitData& fd, const MatrixD& z, std::span<const double> r,
                 std::span<const double> p_in) {
    const std::size_t n = fd.num_columns();
    std::vector<double> col_num(n), col_den(n);
    for (std::size_t j = 0; j < n; ++j)
        detail::col_p_partial(fd, z, r, j, col_num[j], col_den[j]);
    return detail::combine_p(fd, col_num, col_den, p_in);
}

RUpdate r_update(const FitData& fd, const MatrixD& z, const ParamLogs& logs,
                 std::span<const double> r_in) {
    const std::size_t n = fd.num_columns();
    RUpdate out;
    out.r.resize(n);
    std::vector<char> boundary(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        bool hit = false;
        out.r[j] = detail::col_r_maximize(fd, z, logs, j, r_in[j], hit);
        boundary[j] = hit;
    }
    for (const char b : boundary) out.boundary_hits += b;
    return out;
}

std::vector<double> pi_update(const FitData& fd, const MatrixD& z, PiModel model) {
    const std::size_t m = fd.num_viruses();
    const std::size_t n = fd.num_columns();
    if (model == PiModel::PerVirus) {
        std::vector<double> pi(m);
        for (std::size_t i = 0; i < m; ++i) pi[i] = detail::row_mean_over_representatives(fd, z, i);
        return pi;
    }
    if (model == PiModel::PerAnimal) {
        std::vector<double> pi(n);
        for (std::size_t j = 0; j < n; ++j) pi[j] = detail::col_mean(fd, z, j);
        return pi;
    }
    std::vector<double> row_sums(m);
    for (std::size_t i = 0; i < m; ++i)
        row_sums[i] = detail::row_mean_over_representatives(fd, z, i);
    return {detail::ordered_sum(row_sums) / static_cast<double>(m)};
}

double loglik_binom_part(const FitData& fd, std::span<const double> r) {
    const std::size_t m = fd.num_viruses();
    std::vector<double> parts(m);
    for (std::size_t i = 0; i < m; ++i) parts[i] = detail::row_loglik_binom(fd, r, i);
    return detail::ordered_sum(parts);
}

double loglik_mixture_part(const FitData& fd, const MixtureParams& params, const ParamLogs& logs) {
    const std::size_t m = fd.num_viruses();
    std::vector<double> parts(m);
    for (std::size_t i = 0; i < m; ++i) parts[i] = detail::row_loglik_mixture(fd, params, logs, i);
    return detail::ordered_sum(parts);
}

}  // namespace ervmix::kernels::serial
