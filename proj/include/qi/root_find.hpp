#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qi {

// Bracketing bisection for a monotonically increasing f: solves
// f(x) == target on [lo, hi]. The bracket must satisfy
// f(lo) <= target <= f(hi). Converges when either the function value
// matches to rel_tol or the bracket collapses to rel_tol.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi,
                         double rel_tol, int max_iter = 200) {
    if (!(lo < hi)) throw std::invalid_argument("bisect_increasing: empty bracket");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo > target || fhi < target)
        throw std::invalid_argument("bisect_increasing: bracket does not contain target");
    if (flo == target) return lo;
    if (fhi == target) return hi;

    const double f_scale = std::fmax(1.0, std::fabs(target));
    for (int iter = 0; iter < max_iter; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (std::fabs(fmid - target) <= rel_tol * f_scale) return mid;
        if (hi - lo <= rel_tol * std::fmax(1.0, std::fabs(mid))) return mid;
        if (fmid < target)
            lo = mid;
        else
            hi = mid;
    }
    throw std::runtime_error("bisect_increasing: no convergence after " +
                             std::to_string(max_iter) + " iterations");
}

}  // namespace qi
