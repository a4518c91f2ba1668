#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "harvest/errors.hpp"
#include "harvest/params.hpp"
#include "harvest/special_functions.hpp"

// Closed-form detector observables for a Gaussian switching window. Everything
// is a function of the five dimensionless groups in DimensionlessParams and is
// exactly linear in lambda_bar_sq. The local term and both halves of the pair
// correlator reduce to scaled error functions of two combinations:
//
//   s^2 = sigma^2 + t_bar^2        (switching-broadened width)
//   a   = t_bar^2 omega_bar / s    (gap parameter after completing the square)
//
// All exponentials below have non-positive arguments, so nothing overflows no
// matter how detuned or separated the pair is; deep suppression underflows to
// zero, which is the correct limit.

namespace harvest {

namespace detail {
inline constexpr double sqrt_pi = 1.7724538509055160273;
}

// Local excitation probability of one detector, divided by nothing: this is
// the bare second-order probability, so perturbative validity means it has to
// come out small. Kept accurate down to the underflow edge by routing the gap
// factor through erfcx and, for a >= 7, an alternating asymptotic series whose
// truncation error is below 1e-17 relative.
inline double l_term_closed(const DimensionlessParams& p) {
    if (p.t_bar <= 0 || p.sigma <= 0)
        throw domain_error("l_term_closed: t_bar and sigma must be positive");
    const double s2 = p.sigma * p.sigma + p.t_bar * p.t_bar;
    const double s = std::sqrt(s2);
    const double a = p.t_bar * p.t_bar * p.omega_bar / s;
    double i3;  // exp(a^2) * integral_0^infty x^3 exp(-(x+a)^2) dx
    if (a < 7.0) {
        i3 = 0.5 * (1.0 + a * a
                    - 0.5 * detail::sqrt_pi * a * (3.0 + 2.0 * a * a) * erfcx(a));
    } else {
        double term = 3.0 / (8.0 * a * a * a * a);
        double sum = term;
        for (int m = 0; m < 64; ++m) {
            const double next =
                -term * double((2 * m + 5) * (2 * m + 4)) / (double(m + 1) * 4.0 * a * a);
            if (std::abs(next) >= std::abs(term)) break;
            term = next;
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        }
        i3 = sum;
    }
    const double gap = std::exp(-p.t_bar * p.t_bar * p.omega_bar * p.omega_bar);
    return p.lambda_bar_sq * p.t_bar * p.t_bar / (2.0 * std::numbers::pi * s2 * s2) * gap * i3;
}

// Real (vacuum-fluctuation) half of the pair correlator M. The separation
// enters only through D(y)/y with y = l_sep/(2s), which is finite as y -> 0,
// so the formula is stable arbitrarily close to coincidence; exactly zero
// separation is a degenerate pair and is rejected.
inline double m_plus_closed(const DimensionlessParams& p) {
    if (p.t_bar <= 0 || p.sigma <= 0)
        throw domain_error("m_plus_closed: t_bar and sigma must be positive");
    if (p.l_sep == 0)
        throw degenerate_geometry_error("m_plus_closed: detectors coincide (l_sep = 0)");
    if (p.l_sep < 0)
        throw domain_error("m_plus_closed: l_sep must be non-negative");
    const double s2 = p.sigma * p.sigma + p.t_bar * p.t_bar;
    const double s = std::sqrt(s2);
    const double y = p.l_sep / (2.0 * s);
    const double bracket_over_l =
        (p.l_sep * p.l_sep - 2.0 * s2) * dawson_over_x(y) / (2.0 * s) - s;
    const double gap = std::exp(-p.t_bar * p.t_bar * p.omega_bar * p.omega_bar);
    return p.lambda_bar_sq * p.t_bar * p.t_bar * gap * bracket_over_l
           / (8.0 * std::numbers::pi * s2 * s2 * s);
}

// Imaginary (retarded, commutator) half of the pair correlator: M = M_plus +
// i * m_minus_im with m_minus_im real, so this returns the real coefficient.
// Two Gaussians appear, one cut off by the broadened width s and one by the
// bare sigma; at large separation the sigma one dies first and the erf factor
// saturates. erf(z)/z keeps the z -> 0 (small separation) limit finite.
inline double m_minus_closed(const DimensionlessParams& p) {
    if (p.t_bar <= 0 || p.sigma <= 0)
        throw domain_error("m_minus_closed: t_bar and sigma must be positive");
    if (p.l_sep == 0)
        throw degenerate_geometry_error("m_minus_closed: detectors coincide (l_sep = 0)");
    if (p.l_sep < 0)
        throw domain_error("m_minus_closed: l_sep must be non-negative");
    const double sg = p.sigma;
    const double tb = p.t_bar;
    const double s2 = sg * sg + tb * tb;
    const double s = std::sqrt(s2);
    const double gap2 = tb * tb * p.omega_bar * p.omega_bar;
    const double e_broad = std::exp(-gap2 - p.l_sep * p.l_sep / (4.0 * s2));
    const double e_bare = std::exp(-gap2 - p.l_sep * p.l_sep / (4.0 * sg * sg));
    const double z = p.l_sep * tb / (2.0 * sg * s);
    const double bracket_over_l =
        detail::sqrt_pi * sg * sg * sg * (p.l_sep * p.l_sep - 2.0 * s2) * e_broad
            * erf_over_x(z) * tb / (2.0 * sg * s)
        - 2.0 * tb * s * (2.0 * sg * sg + tb * tb) * e_bare;
    return -p.lambda_bar_sq * tb * tb * bracket_over_l
           / (16.0 * std::numbers::pi * sg * sg * sg * s2 * s2 * s);
}

// Single-mode time-domain kernel at wavenumber k: the ordered double integral
// of the switching window against the mode phases, reported in the doubled
// convention where (k, omega_bar) = (0, 0) gives exactly 2 pi. The real part
// is the symmetric (absorptive) piece, the imaginary part the principal-value
// piece, which is why the Dawson function shows up.
template <class Real>
std::complex<Real> q_beta_closed_t(Real k, Real omega_bar, Real t_bar) {
    const Real kt = k * t_bar;
    const Real pref =
        Real(2) * std::numbers::pi_v<Real> * std::exp(-omega_bar * omega_bar * t_bar * t_bar);
    return {pref * std::exp(-kt * kt), -pref * gauss_erfi(kt)};
}

inline std::complex<double> q_beta_closed(double k, const DimensionlessParams& p) {
    if (p.t_bar <= 0) throw domain_error("q_beta_closed: t_bar must be positive");
    return q_beta_closed_t<double>(k, p.omega_bar, p.t_bar);
}

// Entanglement negativity of the X-state below, valid at second order where
// the competition is literally |M| against the geometric mean of the local
// terms (equal here, so just l_term).
inline double negativity(double l_term, double m_abs) {
    if (l_term < 0 || m_abs < 0)
        throw domain_error("negativity: l_term and m_abs must be non-negative");
    return std::max(m_abs - l_term, 0.0);
}

// Fraction of the harvested negativity that a one-way classical channel could
// have produced: n_minus is the negativity recomputed with only the retarded
// half of M. Zero negativity means nothing to attribute, reported as 0.
inline double signaling_estimator(double n_minus, double n) {
    if (n_minus < 0 || n < 0)
        throw domain_error("signaling_estimator: negativities must be non-negative");
    if (n == 0) return 0.0;
    return std::clamp(n_minus / n, 0.0, 1.0);
}

// Everything the sweep engine records per grid point. m_minus_im is the real
// coefficient of the imaginary half (M = m_plus + i m_minus_im), m_abs the
// modulus that competes against l_term in the negativity.
struct HarvestResult {
    double l_term = 0;
    double l_cross = 0;
    double m_plus = 0;
    double m_minus_im = 0;
    double m_abs = 0;
    double negativity = 0;
    double signaling = 0;
};

// Two-detector reduced state to second order in the coupling, in the ordered
// basis |gg>, |ge>, |eg>, |ee>. Off-diagonals couple |gg><ee| (the M term)
// and |ge><eg| (the L cross term); everything else vanishes at this order.
struct TwoDetectorState {
    std::array<std::array<std::complex<double>, 4>, 4> rho;
};

inline TwoDetectorState assemble_state(double l_aa, double l_bb, double l_ab,
                                       std::complex<double> m) {
    if (l_aa < 0 || l_bb < 0)
        throw domain_error("assemble_state: local terms must be non-negative");
    if (l_aa + l_bb > 1.0)
        throw perturbative_bound_error(
            "assemble_state: local excitation exceeds unit probability");
    TwoDetectorState st;
    for (auto& row : st.rho) row.fill({0.0, 0.0});
    st.rho[0][0] = 1.0 - l_aa - l_bb;
    st.rho[1][1] = l_bb;
    st.rho[2][2] = l_aa;
    st.rho[1][2] = l_ab;
    st.rho[2][1] = l_ab;
    st.rho[0][3] = std::conj(m);
    st.rho[3][0] = m;
    return st;
}

}
