#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "capax/errors.hpp"

namespace capax {

struct BisectionOptions {
    double rel_tol = 1e-10;  ///< stop when the bracket width is below rel_tol * max(|lo|, |hi|)
    double abs_tol = 0.0;
    int max_iter = 500;
};

/// Root of f on [lo, hi] by bisection. f(lo) and f(hi) must not share a strict sign;
/// an endpoint where f vanishes is returned as is.
template <class F>
double bisect(F&& f, double lo, double hi, BisectionOptions opts = {}) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!(std::isfinite(flo) && std::isfinite(fhi)) || (flo > 0.0) == (fhi > 0.0)) {
        throw Error(ErrorKind::NoBracket, "no sign change on [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
    }
    for (int it = 0; it < opts.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double width = hi - lo;
        const double scale = std::max(std::abs(lo), std::abs(hi));
        if (width <= opts.rel_tol * scale || width <= opts.abs_tol || mid == lo || mid == hi) {
            return mid;
        }
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Largest real root of a2 x² + a1 x + a0 with a2 > 0, evaluated without cancellation.
/// Empty when the discriminant is negative.
inline std::optional<double> largest_quadratic_root(double a2, double a1, double a0) {
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    if (a1 > 0.0) {
        // -a1 + sq loses digits; use the product of roots instead.
        return (-2.0 * a0) / (a1 + sq);
    }
    return (-a1 + sq) / (2.0 * a2);
}

}  // namespace capax
