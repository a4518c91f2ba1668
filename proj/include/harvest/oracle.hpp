#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <type_traits>
#include <vector>

#include "harvest/constants.hpp"
#include "harvest/errors.hpp"
#include "harvest/params.hpp"
#include "harvest/quadrature.hpp"
#include "harvest/response.hpp"
#include "harvest/special_functions.hpp"

// Numerical oracle: every closed-form observable recomputed from its defining
// integral. The spectral side integrates the phonon-momentum densities with
// the oscillatory factor split at its zeros; the time-domain side does the
// ordered double integral over the switching window in long double, because
// the doubled-kernel convention leaves ~1e-16-level structure that double
// roundoff would bury. Shares parameter structs with response.hpp and nothing
// else, so agreement actually means something.

namespace harvest {

enum class IntegrandKind { l_term, l_cross, m_plus, m_minus };

struct Integrand {
    IntegrandKind kind;
    DimensionlessParams params;
};

namespace detail {

template <class Real>
Real sinc(Real x) {
    const Real x2 = x * x;
    if (x2 < std::numeric_limits<Real>::epsilon()) return Real(1) - x2 / Real(6);
    return std::sin(x) / x;
}

}

// Pointwise spectral density of each observable: integrating this over
// k in [0, inf) gives l_term, l_cross, m_plus, or m_minus_im respectively.
// This is what the mode-resolved diagnostics sample and what the healing-scale
// fractions integrate.
inline double integrand_value(const Integrand& ig, double k) {
    const auto& p = ig.params;
    if (p.t_bar <= 0 || p.sigma <= 0)
        throw domain_error("integrand_value: t_bar and sigma must be positive");
    if (k < 0) throw domain_error("integrand_value: k must be non-negative");
    const double tb2 = p.t_bar * p.t_bar;
    const double gauss_sigma = std::exp(-p.sigma * p.sigma * k * k);
    switch (ig.kind) {
        case IntegrandKind::l_term:
        case IntegrandKind::l_cross: {
            const double shifted = (k + p.omega_bar) * (k + p.omega_bar);
            double v = p.lambda_bar_sq * tb2 / (2.0 * std::numbers::pi) * k * k * k
                       * std::exp(-tb2 * shifted) * gauss_sigma;
            if (ig.kind == IntegrandKind::l_cross) v *= detail::sinc(k * p.l_sep);
            return v;
        }
        case IntegrandKind::m_plus:
        case IntegrandKind::m_minus: {
            if (p.l_sep == 0)
                throw degenerate_geometry_error(
                    "integrand_value: pair density needs l_sep > 0");
            if (p.l_sep < 0)
                throw domain_error("integrand_value: l_sep must be non-negative");
            const double common = p.lambda_bar_sq * tb2
                                  / (2.0 * std::numbers::pi * p.l_sep) * k * k
                                  * std::exp(-p.omega_bar * p.omega_bar * tb2)
                                  * std::sin(k * p.l_sep) * gauss_sigma;
            if (ig.kind == IntegrandKind::m_plus)
                return -common * std::exp(-k * k * tb2);
            return common * gauss_erfi(k * p.t_bar);
        }
    }
    throw domain_error("integrand_value: unknown integrand kind");
}

namespace detail {

// Everything past k_up is below ~exp(-144) of the peak: the local densities
// are cut by the switching-broadened width, the pair densities only by the
// bare detector width (the Dawson tail cancels the switching Gaussian).
inline double k_upper(IntegrandKind kind, const DimensionlessParams& p) {
    const bool pair =
        kind == IntegrandKind::m_plus || kind == IntegrandKind::m_minus;
    const double width =
        pair ? p.sigma : std::sqrt(p.sigma * p.sigma + p.t_bar * p.t_bar);
    return std::max(12.0 / width, p.omega_bar + 12.0 / p.t_bar);
}

// Integrate f over [k_lo, k_up] splitting at the zeros of sin(k l_sep), so
// every piece is free of sign changes and cusps of |f|. Tight per-lobe
// relative tolerance keeps the summed error proportional to the L1 mass, not
// to the (possibly heavily cancelled) signed result. Stops early once the
// Gaussian cutoff has made three consecutive lobes negligible.
template <class F>
QuadResult<double> lobed_quad(const F& f, double l_sep, double k_lo, double k_up,
                              double lobe_rel, double lobe_abs) {
    double value = 0, err = 0, abs_acc = 0;
    int tiny_run = 0;
    const double step = l_sep > 0 ? std::numbers::pi / l_sep : k_up - k_lo;
    long j = l_sep > 0 ? static_cast<long>(std::floor(k_lo / step)) + 1 : 1;
    double lo = k_lo;
    while (lo < k_up) {
        const double hi = std::min(j * step, k_up);
        if (hi > lo) {
            const auto r = adaptive_quad(f, lo, hi, lobe_rel, lobe_abs);
            value += r.value;
            err += r.error;
            abs_acc += std::abs(r.value);
            if (std::abs(r.value) <= 1e-18 * abs_acc) {
                if (++tiny_run >= 3) break;
            } else {
                tiny_run = 0;
            }
        }
        lo = hi;
        ++j;
    }
    return {value, err};
}

}

// Local term, recomputed by quadrature of its spectral density.
inline double l_term_numeric(const DimensionlessParams& p, double rel_tol = 1e-10) {
    const Integrand ig{IntegrandKind::l_term, p};
    auto f = [&](double k) { return integrand_value(ig, k); };
    const double k_up = detail::k_upper(ig.kind, p);
    return adaptive_quad(f, 0.0, k_up, rel_tol, 0.0).value;
}

// Both halves of the pair correlator at once: real part from the symmetric
// density, imaginary from the Dawson (principal-value) density.
inline std::complex<double> m_numeric(const DimensionlessParams& p) {
    if (p.l_sep == 0)
        throw degenerate_geometry_error("m_numeric: detectors coincide (l_sep = 0)");
    const Integrand re_ig{IntegrandKind::m_plus, p};
    const Integrand im_ig{IntegrandKind::m_minus, p};
    const double k_up = detail::k_upper(IntegrandKind::m_plus, p);
    auto fre = [&](double k) { return integrand_value(re_ig, k); };
    auto fim = [&](double k) { return integrand_value(im_ig, k); };
    const auto re = detail::lobed_quad(fre, p.l_sep, 0.0, k_up, 1e-12, 1e-20);
    const auto im = detail::lobed_quad(fim, p.l_sep, 0.0, k_up, 1e-12, 1e-20);
    return {re.value, im.value};
}

// Cross term between the two detectors. No closed form survives the sinc
// factor, so nonzero separation goes through quadrature; coincident detectors
// reduce exactly to the local term.
inline double l_cross_closed_or_numeric(const DimensionlessParams& p) {
    if (p.l_sep < 0) throw domain_error("l_cross: l_sep must be non-negative");
    if (p.l_sep == 0) return l_term_closed(p);
    const Integrand ig{IntegrandKind::l_cross, p};
    auto f = [&](double k) { return integrand_value(ig, k); };
    const double k_up = detail::k_upper(ig.kind, p);
    return detail::lobed_quad(f, p.l_sep, 0.0, k_up, 1e-12, 1e-20).value;
}

// Where in the phonon spectrum an observable accumulates: signed total plus
// the fraction of L1 mass above a cutoff (1 at k_cut = 0 by construction).
// The L1 convention keeps the fraction in [0, 1] even for densities that
// oscillate through zero.
struct SpectralReport {
    double total;
    double fraction_above_cutoff;
    double k_cut;
};

// The fraction is an L1 ratio: how much of the integrand's absolute mass sits
// above the cutoff. For the oscillatory kinds a signed tail-over-total ratio
// can leave [0,1] entirely once cancellation sets in, which would make the
// diagnostic meaningless exactly where it matters.
inline SpectralReport spectral_report(const Integrand& ig, double k_cut) {
    if (k_cut < 0) throw domain_error("spectral_report: k_cut must be non-negative");
    const auto& p = ig.params;
    const double k_up = detail::k_upper(ig.kind, p);
    auto f = [&](double k) { return integrand_value(ig, k); };
    auto fabs_ = [&](double k) { return std::abs(integrand_value(ig, k)); };
    const double l_sep =
        ig.kind == IntegrandKind::l_term ? 0.0 : p.l_sep;
    const double total = detail::lobed_quad(f, l_sep, 0.0, k_up, 1e-10, 1e-20).value;
    const double mass = detail::lobed_quad(fabs_, l_sep, 0.0, k_up, 1e-10, 1e-20).value;
    double tail = 0;
    if (k_cut < k_up && mass > 0)
        tail = detail::lobed_quad(fabs_, l_sep, k_cut, k_up, 1e-10, 1e-20).value;
    const double fraction = mass > 0 ? std::clamp(tail / mass, 0.0, 1.0) : 0.0;
    return {total, fraction, k_cut};
}

// Local term in a cubic box of side box_side: the continuum integral becomes
// a lattice sum over k = (2 pi / box_side) n, n in Z^3 minus the condensate
// mode. Modes are binned by |n|^2 first, so the cost is one exponential per
// occupied shell rather than per mode.
inline double finite_volume_l(const DimensionlessParams& p, double box_side,
                              double k_max) {
    if (p.t_bar <= 0 || p.sigma <= 0 || box_side <= 0 || k_max <= 0)
        throw domain_error("finite_volume_l: needs positive widths, box and k_max");
    const double dk = 2.0 * std::numbers::pi / box_side;
    const long n_max = static_cast<long>(std::floor(k_max / dk));
    if (n_max < 1) return 0.0;
    const double est = 4.19 * double(n_max + 1) * double(n_max + 1) * double(n_max + 1);
    if (est > 1e8)
        throw mode_count_error("finite_volume_l: lattice exceeds 1e8 modes");
    const long n2_max = n_max * n_max;
    std::vector<long> shell(static_cast<std::size_t>(n2_max) + 1, 0);
    for (long i = -n_max; i <= n_max; ++i)
        for (long j = -n_max; j <= n_max; ++j)
            for (long l = -n_max; l <= n_max; ++l) {
                const long n2 = i * i + j * j + l * l;
                if (n2 > 0 && n2 <= n2_max) ++shell[static_cast<std::size_t>(n2)];
            }
    const double tb2 = p.t_bar * p.t_bar;
    const double volume = box_side * box_side * box_side;
    double sum = 0;
    for (long n2 = 1; n2 <= n2_max; ++n2) {
        const long count = shell[static_cast<std::size_t>(n2)];
        if (count == 0) continue;
        const double k = dk * std::sqrt(double(n2));
        const double shifted = (k + p.omega_bar) * (k + p.omega_bar);
        sum += double(count) * k
               * std::exp(-tb2 * shifted - p.sigma * p.sigma * k * k);
    }
    return p.lambda_bar_sq * tb2 * std::numbers::pi / volume * sum;
}

// One phonon mode of the condensate: frequency and the two-mode squeezing
// amplitudes, in the convention u^2 - v^2 = 1 with v <= 0. Both are written
// against E + hbar omega, never E - hbar omega, so nothing cancels at large k.
struct BogoliubovPoint {
    double k;
    double omega;  // rad/s
    double u;
    double v;
};

inline BogoliubovPoint bogoliubov_point(double k, const DerivedCondensate& cond) {
    if (k <= 0)
        throw domain_error("bogoliubov_point: k must be positive (condensate mode excluded)");
    const double eps_k = hbar * k * k / (2.0 * cond.spec.m_b);  // rad/s
    const double omega = std::sqrt(cond.c_s * cond.c_s * k * k + eps_k * eps_k);
    const double mu_int = cond.g_bb * cond.spec.rho0;           // J
    const double e_tot = hbar * eps_k + mu_int;                 // J
    const double denom = 2.0 * hbar * omega * (e_tot + hbar * omega);
    const double u = std::sqrt((e_tot + hbar * omega) / (2.0 * hbar * omega));
    const double v = -mu_int / std::sqrt(denom);
    return {k, omega, u, v};
}

// How far a mode sits from the phononic (linear) part of the dispersion:
// (omega - c_s k) / omega, 0 at k -> 0, 1 - 1/sqrt(1.5) ~ 0.1835 at the
// healing scale k = 1/xi. Written so small k suffers no cancellation.
inline double relativistic_error(double k, const DerivedCondensate& cond) {
    if (k <= 0) throw domain_error("relativistic_error: k must be positive");
    const double r2 = 0.5 * (k * cond.xi) * (k * cond.xi);
    const double root = std::sqrt(1.0 + r2);
    return r2 / (root * (1.0 + root));
}

// Gaussian switching window in scaled time, unit standard width.
struct GaussianSwitching {
    long double operator()(long double u) const { return std::exp(-u * u / 2); }
};

// Tabulated switching profile: two columns, strictly increasing abscissa,
// linearly interpolated, zero outside the table. Exposes its nodes as
// integration breakpoints: the quadrature must not straddle a slope kink,
// or the embedded error estimate can alias into a false convergence claim.
struct SampledProfile {
    std::vector<double> t, value;

    SampledProfile(std::vector<double> t_in, std::vector<double> v_in)
        : t(std::move(t_in)), value(std::move(v_in)) {
        if (t.size() != value.size() || t.size() < 2)
            throw domain_error("SampledProfile: need two equal-length columns, >= 2 rows");
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
            if (!(t[i] < t[i + 1]))
                throw domain_error("SampledProfile: abscissa must increase strictly");
        for (std::size_t i = 0; i < t.size(); ++i)
            if (!std::isfinite(t[i]) || !std::isfinite(value[i]))
                throw domain_error("SampledProfile: entries must be finite");
    }

    long double operator()(long double u) const {
        if (u < t.front() || u > t.back()) return 0.0L;
        const auto it = std::upper_bound(t.begin(), t.end(), double(u));
        const std::size_t i = it == t.begin()
                                  ? 1
                                  : std::min(static_cast<std::size_t>(it - t.begin()),
                                             t.size() - 1);
        const long double t0 = t[i - 1], t1 = t[i];
        const long double w = (u - t0) / (t1 - t0);
        return (1.0L - w) * value[i - 1] + w * value[i];
    }

    std::vector<long double> breakpoints() const {
        return std::vector<long double>(t.begin(), t.end());
    }
};

namespace detail {

template <class Beta>
long double switching_mass(const Beta& beta, long double lo, long double hi) {
    auto f = [&](long double u) { return std::abs(beta(u)); };
    return adaptive_quad(f, lo, hi, 1e-6L, 1e-30L).value;
}

// Profiles may advertise abscissae where they are not smooth (table nodes,
// window edges). Smooth profiles advertise nothing.
template <class B, class = void>
struct profile_cuts {
    static std::vector<long double> get(const B&) { return {}; }
};
template <class B>
struct profile_cuts<B, std::void_t<decltype(std::declval<const B&>().breakpoints())>> {
    static std::vector<long double> get(const B& b) {
        const auto raw = b.breakpoints();
        return std::vector<long double>(raw.begin(), raw.end());
    }
};

}

// Ordered time-domain double integral of the switching window against the
// single-mode phases, doubled to match q_beta_closed's convention (so a
// Gaussian window at k = omega_bar = 0 integrates to exactly 2 pi). Runs in
// long double throughout: in double the roundoff floor of the outer integral
// sits above the 1e-16 comparisons this exists to support. The window must
// hold all but 1e-12 of the profile's mass; anything worse is reported, not
// patched over.
template <class Beta>
std::complex<long double> q_beta_numeric_t(long double k, long double omega_bar,
                                           long double t_bar, const Beta& beta,
                                           long double window,
                                           long double rel_tol = 1e-11L,
                                           long double abs_tol = 0.0L) {
    if (t_bar <= 0) throw domain_error("q_beta_numeric: t_bar must be positive");
    if (k < 0) throw domain_error("q_beta_numeric: k must be non-negative");
    if (window <= 0) throw domain_error("q_beta_numeric: window must be positive");
    const long double w = window;
    const long double mass_in = detail::switching_mass(beta, -w, w);
    const long double mass_out = detail::switching_mass(beta, w, 6 * w)
                                 + detail::switching_mass(beta, -6 * w, -w);
    if (!(mass_in > 0))
        throw domain_error("q_beta_numeric: switching profile has no mass in window");
    if (mass_out > 1e-12L * mass_in)
        throw window_error("q_beta_numeric: window leaves more than 1e-12 of the "
                           "switching mass outside");
    if (abs_tol <= 0) abs_tol = 1e-18L * mass_in * mass_in;

    const long double w_sum = omega_bar * t_bar;  // phase rate in u + u'
    const long double w_dif = k * t_bar;          // phase rate in u - u'
    QuadOptions osc;
    osc.max_segment = 3.0 / std::max(1.0, double(w_sum + w_dif));
    // the inner integral has to be quiet enough that its jitter reads as
    // roundoff (not structure) to the outer error estimator
    const long double inner_rel = std::max(1e-2L * rel_tol, 1e-16L);
    const long double inner_abs =
        std::max(1e-19L * mass_in, 1e-2L * abs_tol / (2 * w));

    // Quadrature intervals must never straddle a kink of the profile: the
    // embedded pair can agree by accident across a corner and freeze a wrong
    // interval with a small error claim. Cutting exactly at the advertised
    // breakpoints keeps every integrated piece smooth. A uniform lattice is
    // merged in so the inner integral can be served from per-segment prefix
    // sums instead of being recomputed from -w for every outer node.
    std::vector<long double> cuts;
    for (long double b : detail::profile_cuts<Beta>::get(beta))
        if (b > -w && b < w) cuts.push_back(b);
    const int lattice = 72;
    for (int j = 1; j < lattice; ++j)
        cuts.push_back(-w + (2.0L * w * j) / lattice);
    cuts.push_back(-w);
    cuts.push_back(w);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](long double a, long double b) {
                               return b - a < 1e-12L * w;
                           }),
               cuts.end());
    cuts.front() = -w;
    cuts.back() = w;
    const std::size_t nseg = cuts.size() - 1;

    auto inner_f = [&](long double up) {
        return beta(up) * std::polar(1.0L, (w_sum + w_dif) * up);
    };
    std::vector<std::complex<long double>> prefix(cuts.size());
    prefix[0] = 0.0L;
    const long double inner_abs_piece = inner_abs / 8;
    for (std::size_t j = 0; j < nseg; ++j)
        prefix[j + 1] = prefix[j] + adaptive_quad(inner_f, cuts[j], cuts[j + 1],
                                                  inner_rel, inner_abs_piece, osc)
                                        .value;

    // Per-segment control is purely absolute: segment values cancel against
    // each other when the phases oscillate, so a relative target per segment
    // would not bound the error of the sum.
    std::complex<long double> q = 0.0L;
    const long double outer_abs = abs_tol / (2 * nseg);
    for (std::size_t j = 0; j < nseg; ++j) {
        auto outer_f = [&, j](long double u) {
            auto g = prefix[j];
            if (u > cuts[j])
                g += adaptive_quad(inner_f, cuts[j], u, inner_rel,
                                   inner_abs_piece, osc)
                         .value;
            return beta(u) * std::polar(1.0L, (w_sum - w_dif) * u) * g;
        };
        q += adaptive_quad(outer_f, cuts[j], cuts[j + 1], 0.0L, outer_abs, osc)
                 .value;
    }
    return 2.0L * q;
}

template <class Beta>
std::complex<double> q_beta_numeric(double k, const DimensionlessParams& p,
                                    const Beta& beta, double window = 9.0,
                                    double rel_tol = 1e-11, double abs_tol = 0.0) {
    const auto q = q_beta_numeric_t(static_cast<long double>(k),
                                    static_cast<long double>(p.omega_bar),
                                    static_cast<long double>(p.t_bar), beta,
                                    static_cast<long double>(window),
                                    static_cast<long double>(rel_tol),
                                    static_cast<long double>(abs_tol));
    return {static_cast<double>(q.real()), static_cast<double>(q.imag())};
}

}
