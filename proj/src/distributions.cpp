#include "ervmix/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ervmix {

namespace {

void check_nb(const NBParams& params) {
    if (!(params.r > 0.0))
        throw std::domain_error("negative binomial shape r must be positive, got " +
                                std::to_string(params.r));
    if (!(params.theta > 0.0 && params.theta < 1.0))
        throw std::domain_error("negative binomial theta must lie in (0,1), got " +
                                std::to_string(params.theta));
}

void check_count(std::int64_t x) {
    if (x < 0) throw std::domain_error("count must be non-negative, got " + std::to_string(x));
}

}  // namespace

double nb_log_pmf(std::int64_t x, const NBParams& params) {
    check_nb(params);
    check_count(x);
    const double xd = static_cast<double>(x);
    return std::lgamma(xd + params.r) - std::lgamma(params.r) - std::lgamma(xd + 1.0) +
           params.r * std::log(params.theta) + xd * std::log1p(-params.theta);
}

Moments nb_moments(const NBParams& params) {
    check_nb(params);
    const double ratio = (1.0 - params.theta) / params.theta;
    return {params.r * ratio, params.r * ratio / params.theta};
}

double geometric_log_pmf(std::int64_t x, double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("geometric p must lie in (0,1), got " + std::to_string(p));
    check_count(x);
    return std::log(p) + static_cast<double>(x) * std::log1p(-p);
}

double poisson_log_pmf(std::int64_t x, double lambda) {
    if (!(lambda > 0.0))
        throw std::domain_error("poisson lambda must be positive, got " + std::to_string(lambda));
    check_count(x);
    const double xd = static_cast<double>(x);
    return xd * std::log(lambda) - lambda - std::lgamma(xd + 1.0);
}

double log_sum_exp2(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// Acklam's rational approximation refined with one Halley step; absolute
// error well below 1e-12 over (0, 1).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile requires p in (0,1), got " + std::to_string(p));

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double t = q * q;
        x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * q /
            (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement against erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

}  // namespace ervmix
