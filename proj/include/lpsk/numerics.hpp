/**
 *  @file numerics.hpp
 *  @brief Small scalar search helpers shared by the certification and geometry code
 */
#pragma once

#include <cmath>
#include <utility>

namespace lpsk {

struct ScalarMin {
    double x = 0.0;
    double f = 0.0;
};

/**
 *  @brief Golden-section minimization of a unimodal function on [a, b]
 *
 *  Terminates once the bracket is narrower than @p tol. The returned point is
 *  the best evaluated abscissa, never outside [a, b].
 */
template <class F>
ScalarMin golden_section_minimize(F&& f, double a, double b, double tol, int max_iter = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && std::abs(b - a) > tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
}

/// Bisection for a sign change of @p f on [a, b]; assumes f(a) f(b) <= 0.
template <class F>
double bisect_root(F&& f, double a, double b, double tol, int max_iter = 200) {
    double fa = f(a);
    for (int i = 0; i < max_iter && std::abs(b - a) > tol; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace lpsk
