#pragma once

// Internal 1-D maximization helpers shared by the ECM kernels and the
// diagnostic fits.

#include <cmath>
#include <utility>

namespace ervmix::num {

struct GoldenResult {
    double arg;
    double value;
    double lo, hi;  // final bracket containing the maximizer
};

template <typename F>
GoldenResult golden_max(F&& f, double lo, double hi, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;
    double a = lo, b = hi;
    double h = b - a;
    double c = a + invphi2 * h;
    double d = a + invphi * h;
    double fc = f(c);
    double fd = f(d);
    while (h > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = a + invphi2 * h;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + invphi * h;
            fd = f(d);
        }
    }
    return fc >= fd ? GoldenResult{c, fc, a, b} : GoldenResult{d, fd, a, b};
}

inline double digamma(double z) {
    double acc = 0.0;
    while (z < 6.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    const double inv = 1.0 / z;
    const double inv2 = inv * inv;
    return acc + std::log(z) - 0.5 * inv -
           inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

// Refines a golden-section result for a concave objective: if the (strictly
// decreasing) derivative changes sign across the final bracket, bisect it to
// float resolution and keep the better of the two candidates.
template <typename Obj, typename Deriv>
std::pair<double, double> polish_concave_max(const GoldenResult& g, Obj&& obj, Deriv&& deriv,
                                             double min_width = 1e-15) {
    double best_arg = g.arg;
    double best_val = g.value;
    double a = g.lo, b = g.hi;
    if (deriv(a) > 0.0 && deriv(b) < 0.0) {
        for (int it = 0; it < 80 && b - a > min_width; ++it) {
            const double mid = 0.5 * (a + b);
            (deriv(mid) > 0.0 ? a : b) = mid;
        }
        const double arg = 0.5 * (a + b);
        const double val = obj(arg);
        if (val >= best_val) {
            best_arg = arg;
            best_val = val;
        }
    }
    return {best_arg, best_val};
}

}  // namespace ervmix::num
