#pragma once

// Shared helpers for the test suites. The numerical oracles here are written
// independently of the library code paths they check: the maximizer is a
// freshly coded golden section, the likelihood oracle works on plain
// products without logs, and the eigensolver is a cyclic Jacobi sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/matrix.hpp"
#include "ervmix/mixture.hpp"

namespace testsup {

// Golden-section maximizer (test-side oracle).
inline double golden_argmax(const std::function<double(double)>& f, double lo, double hi,
                            double tol) {
    const double phi = (std::sqrt(5.0) + 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - (b - a) / phi;
    double d = a + (b - a) / phi;
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) / phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) / phi;
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

// Generalized binomial coefficient C(x + r - 1, x) as a plain product.
inline double binom_coeff_direct(std::int64_t x, double r) {
    double c = 1.0;
    for (std::int64_t l = 0; l < x; ++l)
        c *= (r + static_cast<double>(l)) / (static_cast<double>(l) + 1.0);
    return c;
}

// Component masses evaluated directly, no logs.
inline double nb_pmf_direct(std::int64_t x, double r, double theta) {
    return binom_coeff_direct(x, r) * std::pow(theta, r) *
           std::pow(1.0 - theta, static_cast<double>(x));
}

// Direct (product-space) evaluation of the full mixture likelihood for small
// instances; returns its log.
inline double loglik_direct(const ervmix::CountMatrix& cm, const ervmix::CohortMetadata& meta,
                            ervmix::ReplicateMode mode, const ervmix::MixtureParams& params) {
    using ervmix::ReplicateMode;
    std::vector<std::vector<int>> groups;
    if (mode == ReplicateMode::Independent) {
        for (std::size_t j = 0; j < cm.num_columns(); ++j) groups.push_back({static_cast<int>(j)});
    } else {
        groups = meta.replicate_groups;
    }
    double ll = 0.0;
    for (std::size_t i = 0; i < cm.num_viruses(); ++i)
        for (const auto& members : groups) {
            double fprod = 1.0, gprod = 1.0;
            for (const int j : members) {
                const std::int64_t x = cm.counts(i, j);
                fprod *= nb_pmf_direct(x, params.r[j], params.alpha[i]);
                gprod *= nb_pmf_direct(x, params.r[j],
                                       params.p[meta.experiment_of_column[j]]);
            }
            const double pi = params.pi_at(i, members.front());
            ll += std::log(pi * fprod + (1.0 - pi) * gprod);
        }
    return ll;
}

// Cyclic Jacobi eigensolver for small symmetric matrices; returns the
// eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t k = 0; k < n; ++k) ev[k] = a[k][k];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

// Small random problem instances for oracle checks.
struct SmallInstance {
    ervmix::CountMatrix cm;
    ervmix::CohortMetadata meta;
    ervmix::MatrixD z;
    std::vector<double> r, alpha, p;
};

inline SmallInstance random_instance(std::mt19937_64& rng, std::size_t m, std::size_t n,
                                     int K, std::int64_t max_count = 40) {
    SmallInstance inst;
    inst.cm.virus_ids.resize(m);
    inst.cm.column_ids.resize(n);
    for (std::size_t i = 0; i < m; ++i) inst.cm.virus_ids[i] = "V" + std::to_string(i);
    for (std::size_t j = 0; j < n; ++j) inst.cm.column_ids[j] = "C" + std::to_string(j);
    inst.cm.counts = ervmix::MatrixI(m, n);
    std::uniform_int_distribution<std::int64_t> count_dist(1, max_count);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& v : inst.cm.counts.data()) v = unit(rng) < 0.5 ? 0 : count_dist(rng);

    std::vector<std::string> animals(n), experiments(n);
    for (std::size_t j = 0; j < n; ++j) {
        animals[j] = "A" + std::to_string(j);
        experiments[j] = "E" + std::to_string(j % K + 1);
    }
    inst.meta = ervmix::CohortMetadata::build(animals, experiments);

    inst.z = ervmix::MatrixD(m, n);
    for (auto& v : inst.z.data()) v = unit(rng);
    inst.r.resize(n);
    for (auto& v : inst.r) v = std::exp(std::uniform_real_distribution<double>(0.0, 4.0)(rng));
    inst.alpha.resize(m);
    for (auto& v : inst.alpha) v = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    inst.p.resize(K);
    for (auto& v : inst.p) v = std::uniform_real_distribution<double>(0.7, 0.98)(rng);
    return inst;
}

inline ervmix::CountMatrix make_counts(const std::vector<std::vector<std::int64_t>>& rows) {
    ervmix::CountMatrix cm;
    const std::size_t m = rows.size(), n = rows.front().size();
    for (std::size_t i = 0; i < m; ++i) cm.virus_ids.push_back("V" + std::to_string(i + 1));
    for (std::size_t j = 0; j < n; ++j) cm.column_ids.push_back("C" + std::to_string(j + 1));
    cm.counts = ervmix::MatrixI(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) cm.counts(i, j) = rows[i][j];
    return cm;
}

}  // namespace testsup
