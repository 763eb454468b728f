#pragma once

#include <cmath>
#include <stdexcept>

namespace hyperstab {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double eps, int depth)
{
    const double m  = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Overflowed integrands cannot be refined; report the blow-up as is.
    if (!std::isfinite(delta)) return left + right;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature of f over [a, b] with interval bisection.
// The error target is relTol * |I| (estimated), floored at absTol.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double relTol,
                          double absTol = 1e-300, int maxDepth = 52)
{
    if (!(b >= a)) throw std::domain_error("integrate_adaptive: b < a");
    if (a == b) return 0.0;
    const double m  = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // First refinement pass gives a usable magnitude for the relative target.
    const double q1 = 0.5 * (a + m);
    const double q3 = 0.5 * (m + b);
    const double refined = (b - a) / 12.0 * (fa + 4.0 * f(q1) + 2.0 * fm + 4.0 * f(q3) + fb);
    const double eps = std::max(absTol, relTol * std::abs(refined));
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, eps, maxDepth);
}

} // namespace hyperstab
