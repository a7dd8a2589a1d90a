#pragma once

#include <cstdint>

namespace ervmix {

// Negative binomial with continuous shape r and success probability theta:
//   P(X = x) = C(x + r - 1, x) theta^r (1 - theta)^x,  x = 0, 1, 2, ...
// The binomial coefficient is generalized through log-gamma so non-integer
// r is valid; the model's true-positive component uses theta = alpha_i and
// the true-negative component theta = p_k with a shared r_j.
struct NBParams {
    double r;      // shape, > 0
    double theta;  // success probability, in (0, 1)
};

double nb_log_pmf(std::int64_t x, const NBParams& params);

struct Moments {
    double mean;
    double variance;
};

// mean = r(1-theta)/theta, variance = r(1-theta)/theta^2
Moments nb_moments(const NBParams& params);

// log p + x log(1-p); equals nb_log_pmf with r = 1, theta = p.
double geometric_log_pmf(std::int64_t x, double p);

// x log(lambda) - lambda - lgamma(x+1)
double poisson_log_pmf(std::int64_t x, double lambda);

// log(exp(a) + exp(b)) without overflow; tolerates -inf arguments.
double log_sum_exp2(double a, double b);

// Standard normal quantile function, p in (0, 1).
double normal_quantile(double p);

}  // namespace ervmix
