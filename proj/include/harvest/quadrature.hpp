#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <type_traits>
#include <vector>

#include <harvest/errors.hpp>

// Adaptive quadrature on an embedded Gauss-Legendre pair (10 and 21 nodes per
// interval, difference as local error), refined by bisecting the worst interval
// first. Nodes are interior, so integrable endpoint behavior and the mapped
// infinite endpoint never get evaluated. Works for real- or complex-valued
// integrands (the abscissa type stays real). Deterministic: identical inputs
// give identical bits.

namespace harvest {

namespace detail {

template <class V>
struct scalar_of {
    using type = V;
};
template <class R>
struct scalar_of<std::complex<R>> {
    using type = R;
};

}

template <class V>
struct QuadResult {
    V value;
    typename detail::scalar_of<V>::type error;
};

struct QuadOptions {
    double max_segment = 0;    // pre-split cap on interval length; 0 = none
    double tail_scale = 1;     // length scale of the k = a - s ln(1-u) map
    int max_intervals = 20000; // bisection budget before quadrature_error
};

namespace detail {

template <class Real, int N>
struct gauss_rule {
    std::array<Real, N> x{}, w{};
    gauss_rule() {
        // Newton on P_N from the Chebyshev initial guess; converges in < 10 steps
        constexpr Real pi = std::numbers::pi_v<Real>;
        for (int i = 0; i < (N + 1) / 2; ++i) {
            Real xi = std::cos(pi * (Real(i) + Real(0.75)) / (Real(N) + Real(0.5)));
            Real dp = 0;
            for (int it = 0; it < 100; ++it) {
                Real p0 = 1, p1 = xi;
                for (int n = 2; n <= N; ++n) {
                    const Real p2 =
                        ((2 * n - 1) * xi * p1 - (n - 1) * p0) / Real(n);
                    p0 = p1;
                    p1 = p2;
                }
                dp = Real(N) * (xi * p1 - p0) / (xi * xi - 1);
                const Real dx = p1 / dp;
                xi -= dx;
                if (std::abs(dx) <= std::numeric_limits<Real>::epsilon() * 2)
                    break;
            }
            x[i] = -xi;
            x[N - 1 - i] = xi;
            const Real wi = Real(2) / ((1 - xi * xi) * dp * dp);
            w[i] = wi;
            w[N - 1 - i] = wi;
        }
    }
};

template <class Real, int N, class F>
auto gauss_apply(const F& f, Real a, Real b) {
    using V = std::invoke_result_t<F, Real>;
    static const gauss_rule<Real, N> rule;
    const Real mid = (a + b) / 2, half = (b - a) / 2;
    V sum{};
    for (int i = 0; i < N; ++i) sum += rule.w[i] * f(mid + half * rule.x[i]);
    return sum * half;
}

template <class Real, class V>
struct quad_interval {
    Real a, b;
    V value;
    Real err;
    bool refinable;
    bool operator<(const quad_interval& o) const { return err < o.err; }
};

template <class Real, class F>
auto quad_eval(const F& f, Real a, Real b) {
    using V = std::invoke_result_t<F, Real>;
    static const gauss_rule<Real, 21> rule;
    const Real mid = (a + b) / 2, half = (b - a) / 2;
    V hi{};
    Real abs_sum = 0;
    for (int i = 0; i < 21; ++i) {
        const V fx = f(mid + half * rule.x[i]);
        hi += rule.w[i] * fx;
        abs_sum += rule.w[i] * std::abs(fx);
    }
    hi *= half;
    abs_sum *= half;
    if (!std::isfinite(static_cast<double>(std::abs(hi))))
        throw quadrature_error("adaptive_quad: integrand not finite",
                               std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::infinity());
    const V lo = gauss_apply<Real, 10>(f, a, b);
    const Real err = std::abs(hi - lo);
    // below the roundoff floor of this interval, bisection only amplifies noise
    const bool refinable =
        err > 50 * std::numeric_limits<Real>::epsilon() * abs_sum;
    return quad_interval<Real, V>{a, b, hi, err, refinable};
}

template <class Real, class F>
auto adaptive_quad_finite(const F& f, Real a, Real b, Real rel_tol,
                          Real abs_tol, const QuadOptions& opt) {
    using V = std::invoke_result_t<F, Real>;
    std::priority_queue<quad_interval<Real, V>> heap;
    long pieces = 1;
    if (opt.max_segment > 0) {
        const Real len = b - a;
        pieces = static_cast<long>(std::ceil(static_cast<double>(len) / opt.max_segment));
        if (pieces < 1) pieces = 1;
        if (pieces > opt.max_intervals)
            throw quadrature_error("adaptive_quad: pre-split exceeds interval budget",
                                   0.0, std::numeric_limits<double>::infinity());
    }
    std::vector<quad_interval<Real, V>> frozen;  // intervals at their roundoff floor
    V total{};
    Real total_err = 0;
    auto place = [&](quad_interval<Real, V>&& iv) {
        total += iv.value;
        total_err += iv.err;
        if (iv.refinable)
            heap.push(iv);
        else
            frozen.push_back(iv);
    };
    for (long i = 0; i < pieces; ++i) {
        const Real lo = a + (b - a) * Real(i) / Real(pieces);
        const Real hi = i + 1 == pieces ? b : a + (b - a) * Real(i + 1) / Real(pieces);
        place(quad_eval(f, lo, hi));
    }
    int used = static_cast<int>(pieces);
    while (total_err > std::max(rel_tol * std::abs(total), abs_tol) && !heap.empty()) {
        if (used >= opt.max_intervals)
            throw quadrature_error("adaptive_quad: tolerance not reached",
                                   static_cast<double>(std::abs(total)),
                                   static_cast<double>(total_err));
        const auto worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.err;
        const Real mid = (worst.a + worst.b) / 2;
        place(quad_eval(f, worst.a, mid));
        place(quad_eval(f, mid, worst.b));
        ++used;
    }
    // an empty heap with the tolerance unmet means the rest is roundoff noise;
    // return the value with its honest estimate rather than churn
    std::vector<quad_interval<Real, V>> ivs = std::move(frozen);
    ivs.reserve(ivs.size() + heap.size());
    while (!heap.empty()) {
        ivs.push_back(heap.top());
        heap.pop();
    }
    // re-sum in interval order: drops the incremental-update roundoff
    std::sort(ivs.begin(), ivs.end(),
              [](const auto& u, const auto& v) { return u.a < v.a; });
    V value{};
    Real err = 0;
    for (const auto& iv : ivs) {
        value += iv.value;
        err += iv.err;
    }
    return QuadResult<V>{value, err};
}

}

template <class Real, class F>
auto adaptive_quad(const F& f, Real a, Real b, Real rel_tol, Real abs_tol,
                   const QuadOptions& opt = {}) {
    if (std::isinf(static_cast<double>(b))) {
        // k = a - s ln(1-u), dk = s/(1-u) du maps [0,1) onto [a, inf)
        const Real s = Real(opt.tail_scale);
        auto g = [&f, a, s](Real u) {
            const Real one_m = Real(1) - u;
            return f(a - s * std::log(one_m)) * (s / one_m);
        };
        QuadOptions inner = opt;
        inner.max_segment = 0;  // oscillation caps are meaningless after the map
        return detail::adaptive_quad_finite<Real>(g, Real(0), Real(1), rel_tol,
                                                  abs_tol, inner);
    }
    return detail::adaptive_quad_finite<Real>(f, a, b, rel_tol, abs_tol, opt);
}

}
