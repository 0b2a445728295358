#ifndef KINKSCAN_QUADRATURE_HPP
#define KINKSCAN_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "kinkscan/errors.hpp"

namespace kinkscan {

namespace detail {

template <class F>
double simpson(const F& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb,
                            double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = simpson(f, a, fa, m, fm, lm, flm);
    double right = simpson(f, m, fm, b, fb, rm, frm);
    double delta = left + right - whole;
    if (depth <= 0) fail(errc::numeric, "adaptive quadrature did not converge");
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson integration of f on [a,b] to absolute tolerance tol.
template <class F>
double integrate(const F& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    if (tol <= 0.0) fail(errc::invalid_argument, "quadrature tolerance must be positive");
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = detail::simpson(f, a, fa, b, fb, m, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Integration with interior breakpoints (kink locations, kernel edges). The
// integrand is smooth between consecutive breakpoints, so splitting restores
// the convergence of the Simpson rule.
template <class F>
double integrate_with_breaks(const F& f, double a, double b,
                             const std::vector<double>& breaks, double tol) {
    if (a == b) return 0.0;
    std::vector<double> pts;
    pts.push_back(a);
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double piece_tol = tol / static_cast<double>(pts.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (pts[i + 1] > pts[i]) total += integrate(f, pts[i], pts[i + 1], piece_tol);
    return total;
}

} // namespace kinkscan

#endif
