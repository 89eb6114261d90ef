/**
 *  @file integrate.hpp
 *  @brief Embedded Runge-Kutta-Fehlberg 7(8) propagation with PI step control
 *
 *  Works on any Eigen column vector. The vector field is called as f(t, y).
 */
#pragma once

#include "lpsk/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace lpsk {

struct IntegratorSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-13;
    std::string order_pair = "rkf78";
    /// When positive, take uniform steps no longer than this and skip error control.
    double fixed_step = 0.0;
    /// First trial step; zero selects one automatically.
    double initial_step = 0.0;

    void validate() const {
        if (order_pair != "rkf78") throw std::invalid_argument("unknown order pair '" + order_pair + "'");
        if (fixed_step > 0.0) return;
        if (!(abs_tol > 0.0 && abs_tol < 1e-2) || !(rel_tol > 0.0 && rel_tol < 1e-2))
            throw std::invalid_argument("integrator tolerances must lie in (0, 1e-2)");
        if (!(min_step > 0.0) || !(min_step <= max_step))
            throw std::invalid_argument("integrator requires 0 < min_step <= max_step");
    }

    static IntegratorSpec truth() { return {}; }
    static IntegratorSpec onboard() {
        IntegratorSpec s;
        s.abs_tol = s.rel_tol = 1e-8;
        return s;
    }
    static IntegratorSpec fixed(double h) {
        IntegratorSpec s;
        s.fixed_step = h;
        return s;
    }
};

template <class V>
struct DenseNode {
    double t;
    V y;
    V dy;
};

template <class V>
struct Propagation {
    V y;
    std::vector<DenseNode<V>> nodes;  ///< accepted steps, including both ends
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
    double next_step = 0.0;  ///< step proposed for a continuation
};

namespace rkf78 {

inline constexpr int stages = 13;
inline constexpr std::array<double, stages> c = {0.0,       2.0 / 27, 1.0 / 9, 1.0 / 6, 5.0 / 12,
                                                 0.5,       5.0 / 6,  1.0 / 6, 2.0 / 3, 1.0 / 3,
                                                 1.0,       0.0,      1.0};
// clang-format off
inline constexpr double a[stages][stages - 1] = {
    {},
    {2.0 / 27},
    {1.0 / 36, 1.0 / 12},
    {1.0 / 24, 0, 1.0 / 8},
    {5.0 / 12, 0, -25.0 / 16, 25.0 / 16},
    {1.0 / 20, 0, 0, 1.0 / 4, 1.0 / 5},
    {-25.0 / 108, 0, 0, 125.0 / 108, -65.0 / 27, 125.0 / 54},
    {31.0 / 300, 0, 0, 0, 61.0 / 225, -2.0 / 9, 13.0 / 900},
    {2.0, 0, 0, -53.0 / 6, 704.0 / 45, -107.0 / 9, 67.0 / 90, 3.0},
    {-91.0 / 108, 0, 0, 23.0 / 108, -976.0 / 135, 311.0 / 54, -19.0 / 60, 17.0 / 6, -1.0 / 12},
    {2383.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -301.0 / 82, 2133.0 / 4100, 45.0 / 82,
     45.0 / 164, 18.0 / 41},
    {3.0 / 205, 0, 0, 0, 0, -6.0 / 41, -3.0 / 205, -3.0 / 41, 3.0 / 41, 6.0 / 41, 0},
    {-1777.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -289.0 / 82, 2193.0 / 4100, 51.0 / 82,
     33.0 / 164, 12.0 / 41, 0, 1.0},
};
// clang-format on
/// Eighth-order weights (used to advance the solution).
inline constexpr std::array<double, stages> b = {0, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35, 9.0 / 35,
                                                 9.0 / 280, 9.0 / 280, 0, 41.0 / 840, 41.0 / 840};
/// Difference between the 8th- and 7th-order solutions is 41/840 (k0 + k10 - k11 - k12) h.
inline constexpr double err_weight = 41.0 / 840;

/// One step of size h; fills k with the stage derivatives (k[0] must hold f(t, y)).
template <class V, class F>
V step(F& f, double t, const V& y, double h, std::array<V, stages>& k) {
    for (int s = 1; s < stages; ++s) {
        V ys = y;
        for (int j = 0; j < s; ++j)
            if (a[s][j] != 0.0) ys += (h * a[s][j]) * k[j];
        k[s] = f(t + c[s] * h, ys);
    }
    V out = y;
    for (int s = 0; s < stages; ++s)
        if (b[s] != 0.0) out += (h * b[s]) * k[s];
    return out;
}

}  // namespace rkf78

namespace detail {

template <class V, class F>
V checked_eval(F& f, double t, const V& y) {
    try {
        return f(t, y);
    } catch (const DomainError& e) {
        std::ostringstream msg;
        msg << e.what() << " at t=" << t;
        throw IntegrationError(msg.str(), t, true);
    }
}

}  // namespace detail

/**
 *  @brief Propagate y' = f(t, y) from t0 to t1
 *
 *  The local error estimate is accepted when max_i |err_i| / (atol + rtol
 *  max(|y_i|, |y_new_i|)) <= 1. Accepted steps are stored as (t, y, y') nodes
 *  when @p keep_nodes is set.
 *  @throws IntegrationError on step-size underflow or a singularity inside f
 */
template <class V, class F>
Propagation<V> propagate(F&& f, const V& y0, double t0, double t1, const IntegratorSpec& spec,
                         bool keep_nodes = true) {
    spec.validate();
    Propagation<V> out;
    out.y = y0;
    const double span = t1 - t0;
    auto eval = [&](double t, const V& y) {
        ++out.evaluations;
        return detail::checked_eval<V>(f, t, y);
    };
    std::array<V, rkf78::stages> k;
    k[0] = eval(t0, y0);
    if (keep_nodes) out.nodes.push_back({t0, y0, k[0]});
    if (span == 0.0) return out;
    const double dir = span > 0 ? 1.0 : -1.0;

    double t = t0;
    V y = y0;

    if (spec.fixed_step > 0.0) {
        const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / spec.fixed_step - 1e-12)));
        const double h = span / static_cast<double>(n);
        for (long i = 0; i < n; ++i) {
            auto fs = [&](double ts, const V& ys) { return eval(ts, ys); };
            y = rkf78::step(fs, t, y, h, k);
            t = (i + 1 == n) ? t1 : t0 + static_cast<double>(i + 1) * h;
            k[0] = eval(t, y);
            ++out.accepted;
            if (keep_nodes) out.nodes.push_back({t, y, k[0]});
        }
        out.y = y;
        out.next_step = h;
        return out;
    }

    double h = spec.initial_step;
    if (!(h > 0.0)) {
        // Hairer-Wanner starting step
        auto scale = [&](const V& v) {
            return (v.array().abs() * spec.rel_tol + spec.abs_tol).matrix();
        };
        const V sc = scale(y0);
        const double d0 = (y0.array() / sc.array()).abs().maxCoeff();
        const double d1 = (k[0].array() / sc.array()).abs().maxCoeff();
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(span));
        const V y1 = y0 + dir * h0 * k[0];
        const V f1 = eval(t0 + dir * h0, y1);
        const double d2 = ((f1 - k[0]).array() / sc.array()).abs().maxCoeff() / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 8.0);
        h = std::min(100 * h0, h1);
    }
    h = std::min({h, spec.max_step, std::abs(span)});

    constexpr double safety = 0.9, grow_max = 5.0, shrink_min = 0.2;
    constexpr double alpha = 0.7 / 8.0, beta = 0.4 / 8.0;
    double err_prev = 1e-4;
    bool last_rejected = false;

    while (dir * (t1 - t) > 0.0) {
        const double remaining = std::abs(t1 - t);
        bool final_step = false;
        double hs = h;
        if (hs >= remaining * (1.0 - 1e-12)) {
            hs = remaining;
            final_step = true;
        }
        if (hs < spec.min_step && !final_step) {
            std::ostringstream msg;
            msg << "step size underflow (h=" << hs << ") at t=" << t;
            throw IntegrationError(msg.str(), t);
        }
        auto fs = [&](double ts, const V& ys) { return eval(ts, ys); };
        const V ynew = rkf78::step(fs, t, y, dir * hs, k);
        const V err = (rkf78::err_weight * hs) * (k[0] + k[10] - k[11] - k[12]);
        const auto tol = (y.array().abs().max(ynew.array().abs()) * spec.rel_tol + spec.abs_tol);
        double e = (err.array().abs() / tol).maxCoeff();
        if (!std::isfinite(e)) e = 1e10;

        if (e <= 1.0) {
            t = final_step ? t1 : t + dir * hs;
            y = ynew;
            k[0] = eval(t, y);
            ++out.accepted;
            if (keep_nodes) out.nodes.push_back({t, y, k[0]});
            const double ee = std::max(e, 1e-10);
            double fac = safety * std::pow(ee, -alpha) * std::pow(err_prev, beta);
            fac = std::clamp(fac, shrink_min, grow_max);
            if (last_rejected) fac = std::min(fac, 1.0);
            // keep the nominal step when the last one was clipped to land on t1
            h = std::min((final_step ? std::max(h, hs) : hs) * fac, spec.max_step);
            err_prev = ee;
            last_rejected = false;
        } else {
            ++out.rejected;
            const double fac = std::max(shrink_min, safety * std::pow(e, -alpha));
            h = hs * fac;
            last_rejected = true;
        }
    }
    out.y = y;
    out.next_step = h;
    return out;
}

/// Cubic Hermite evaluation over accepted nodes; exact at the nodes.
template <class V>
V dense_state(const std::vector<DenseNode<V>>& nodes, double t) {
    if (nodes.empty()) throw std::invalid_argument("dense_state: no nodes");
    const bool fwd = nodes.back().t >= nodes.front().t;
    auto before = [fwd](const DenseNode<V>& n, double tt) { return fwd ? n.t < tt : n.t > tt; };
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t, before);
    if (it == nodes.end()) {
        if (t == nodes.back().t) return nodes.back().y;
        throw RangeError("dense_state: time outside propagated span");
    }
    if (it->t == t) return it->y;
    if (it == nodes.begin()) throw RangeError("dense_state: time outside propagated span");
    const auto& n1 = *it;
    const auto& n0 = *(it - 1);
    const double h = n1.t - n0.t;
    const double s = (t - n0.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * n0.y + (s3 - 2 * s2 + s) * h * n0.dy + (-2 * s3 + 3 * s2) * n1.y +
           (s3 - s2) * h * n1.dy;
}

/**
 *  @brief Propagate through a list of increasing epochs, landing exactly on each
 *
 *  The step size carries over between legs, so the result matches a single
 *  propagation to within the tolerance.
 */
template <class V, class F>
std::vector<V> propagate_to_epochs(F&& f, const V& y0, double t0, const std::vector<double>& epochs,
                                   const IntegratorSpec& spec) {
    std::vector<V> out;
    out.reserve(epochs.size());
    double t = t0;
    V y = y0;
    IntegratorSpec leg = spec;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        if (epochs[i] < t || (i > 0 && !(epochs[i] > epochs[i - 1])))
            throw std::invalid_argument("epochs must be strictly increasing and not before t0");
        auto r = propagate(f, y, t, epochs[i], leg, false);
        y = r.y;
        t = epochs[i];
        if (r.next_step > 0.0) leg.initial_step = r.next_step;
        out.push_back(y);
    }
    return out;
}

}  // namespace lpsk
