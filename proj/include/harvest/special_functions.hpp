#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

// Scaled error functions and the Dawson integral, templated on the scalar so the
// nested time-domain correlator can run the whole chain in long double.
// All branches are chosen so nothing here overflows for arguments the detector
// formulas produce, and so values stay accurate at the 1e-16 absolute floor the
// oracle comparisons use.

namespace harvest {

template <class Real>
Real erf(Real x) {
    return std::erf(x);
}

namespace detail {

// Sampled-Gaussian representation, valid away from 0 (used on 1 <= |x| < 7).
// Sampling error exp(-pi^2/(4h^2)): 7e-18 for h = 0.25, 1.6e-27 for h = 0.2.
// Gaussian window |x - n h| <= 8 truncates below 2e-28.
template <class Real>
Real dawson_sampled(Real x, Real h) {
    long n_lo = static_cast<long>(std::ceil(static_cast<double>((x - Real(8)) / h)));
    long n_hi = static_cast<long>(std::floor(static_cast<double>((x + Real(8)) / h)));
    if (n_lo % 2 == 0) ++n_lo;
    Real sum = 0;
    for (long n = n_lo; n <= n_hi; n += 2) {
        const Real d = x - Real(n) * h;
        sum += std::exp(-d * d) / Real(n);
    }
    return sum * std::numbers::inv_sqrtpi_v<Real>;
}

}

// D(x) = exp(-x^2) * integral_0^x exp(t^2) dt; odd, max 0.5410442246 at 0.9241388730.
template <class Real>
Real dawson(Real x) {
    constexpr Real eps = std::numeric_limits<Real>::epsilon();
    const Real ax = std::abs(x);
    if (ax < Real(1)) {
        // Maclaurin sum_n (-2x^2)^n x / (2n+1)!!, <= 22 terms at the branch edge
        const Real m2x2 = Real(-2) * x * x;
        Real term = x, sum = x;
        for (int n = 0; n < 64; ++n) {
            term *= m2x2 / Real(2 * n + 3);
            sum += term;
            if (std::abs(term) <= eps * std::abs(sum)) break;
        }
        return sum;
    }
    if (ax < Real(7)) {
        const Real h = std::numeric_limits<Real>::digits > 53 ? Real(0.2L) : Real(0.25);
        const Real s = detail::dawson_sampled(ax, h);
        return x < Real(0) ? -s : s;
    }
    // asymptotic (1/2x) sum_n (2n-1)!!/(2x^2)^n; smallest term ~ exp(-x^2) < 5e-22
    const Real inv2x2 = Real(1) / (Real(2) * x * x);
    Real term = Real(1), sum = Real(1);
    for (int n = 0; n < 64; ++n) {
        const Real next = term * Real(2 * n + 1) * inv2x2;
        if (next >= term) break;
        term = next;
        sum += term;
        if (term <= eps * sum) break;
    }
    return sum / (Real(2) * x);
}

// exp(x^2) * erfc(x); decays like 1/(x sqrt(pi)) instead of underflowing.
// Grows like 2 exp(x^2) for x < 0 (overflows past x ~ -26.6 in double).
template <class Real>
Real erfcx(Real x) {
    constexpr Real eps = std::numeric_limits<Real>::epsilon();
    if (x < Real(0))
        return Real(2) * std::exp(x * x) - erfcx(-x);
    if (x < Real(8))
        return std::exp(x * x) * std::erfc(x);
    // asymptotic (1/(x sqrt(pi))) sum_n (-1)^n (2n-1)!!/(2x^2)^n
    const Real inv2x2 = Real(1) / (Real(2) * x * x);
    Real term = Real(1), sum = Real(1);
    for (int n = 0; n < 64; ++n) {
        term *= -Real(2 * n + 1) * inv2x2;
        sum += term;
        if (std::abs(term) <= eps * std::abs(sum)) break;
    }
    return sum * std::numbers::inv_sqrtpi_v<Real> / x;
}

// exp(-x^2) * erfi(x), the Gaussian-damped imaginary error function.
// Bounded (|.| <= 0.6105) and overflow-free for all real x.
template <class Real>
Real gauss_erfi(Real x) {
    return Real(2) * std::numbers::inv_sqrtpi_v<Real> * dawson(x);
}

// D(x)/x, even, finite at 0 (value 1); the vacuum cross term needs it at small
// separation where the naive quotient is 0/0.
template <class Real>
Real dawson_over_x(Real x) {
    constexpr Real eps = std::numeric_limits<Real>::epsilon();
    const Real x2 = x * x;
    if (x2 < eps) return Real(1) - Real(2) * x2 / Real(3);
    return dawson(x) / x;
}

// erf(x)/x, even, finite at 0 (value 2/sqrt(pi)).
template <class Real>
Real erf_over_x(Real x) {
    constexpr Real eps = std::numeric_limits<Real>::epsilon();
    const Real x2 = x * x;
    if (x2 < eps)
        return Real(2) * std::numbers::inv_sqrtpi_v<Real> * (Real(1) - x2 / Real(3));
    return std::erf(x) / x;
}

}
