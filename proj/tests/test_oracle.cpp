#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "harvest/oracle.hpp"
#include "harvest/response.hpp"

using namespace harvest;

namespace {

DimensionlessParams natural(double sigma, double omega_bar, double l_sep) {
    return {.lambda_bar_sq = 1.0,
            .t_bar = 1.0,
            .omega_bar = omega_bar,
            .sigma = sigma,
            .l_sep = l_sep};
}

// 40-digit quadrature of the defining integrals (same source as the response
// pins); the cross-term column is exercised here.
struct OraclePin {
    double sigma, omega_bar, l_sep;
    double l_term, l_cross, m_plus, m_minus_im;
};

constexpr OraclePin oracle_pins[] = {
    {0.5, 1.0, 5.0,
     0.00241909817188481924983668,
     0.0000196943652758019818430195,
     0.000387326344193908065682343,
     -0.000225151926696702576225839},
    {0.1, 2.4, 7.7,
     0.00000300764368341785429086955,
     4.4522383375737433833561e-8,
     0.000000367107817556950238326681,
     -3.41042003432709847236683e-10},
    {1.5, 0.3, 2.0,
     0.00447993272402603390721632,
     0.00308328512500133857637528,
     -0.00452596330154577051968524,
     0.00421784124362183749850782},
    {3.0, 5.0, 12.0,
     4.24712029464720175179227e-16,
     7.46691984882837924916359e-17,
     3.16837105439563775203448e-16,
     -2.03764003583973116460034e-16},
    {0.78833, 2.275, 5.25,
     0.00000479193167271439754590396,
     0.000000791854839009803554976498,
     0.0000044314873504730370469648,
     -0.0000039286224155228153646458},
};

bool within_floor(double got, double want, double rel, double floor) {
    return std::abs(got - want) <= std::max(rel * std::abs(want), floor);
}

}  // namespace

TEST_CASE("numeric local term agrees with the closed form and the pins") {
    for (const auto& pin : oracle_pins) {
        const auto p = natural(pin.sigma, pin.omega_bar, pin.l_sep);
        const double numeric = l_term_numeric(p);
        REQUIRE(within_floor(numeric, l_term_closed(p), 1e-8, 1e-16));
        REQUIRE(within_floor(numeric, pin.l_term, 1e-9, 1e-18));
    }
}

TEST_CASE("numeric pair correlator agrees with the closed halves and the pins") {
    for (const auto& pin : oracle_pins) {
        const auto p = natural(pin.sigma, pin.omega_bar, pin.l_sep);
        const auto m = m_numeric(p);
        REQUIRE(within_floor(m.real(), m_plus_closed(p), 1e-8, 1e-16));
        REQUIRE(within_floor(m.imag(), m_minus_closed(p), 1e-8, 1e-16));
        REQUIRE(within_floor(m.real(), pin.m_plus, 1e-8, 1e-17));
        REQUIRE(within_floor(m.imag(), pin.m_minus_im, 1e-8, 1e-17));
    }
}

TEST_CASE("cross term matches the pins and its limits") {
    for (const auto& pin : oracle_pins) {
        const auto p = natural(pin.sigma, pin.omega_bar, pin.l_sep);
        REQUIRE(within_floor(l_cross_closed_or_numeric(p), pin.l_cross, 1e-8, 1e-17));
    }
    // coincident detectors reduce exactly to the local term
    const auto p0 = natural(0.6, 1.2, 0.0);
    REQUIRE(l_cross_closed_or_numeric(p0) == l_term_closed(p0));
    // the cross term never exceeds the local term (Cauchy-Schwarz)
    for (double l : {0.3, 1.0, 4.0, 15.0}) {
        const auto p = natural(0.6, 1.2, l);
        REQUIRE(std::abs(l_cross_closed_or_numeric(p)) <= l_term_closed(p) * (1 + 1e-12));
    }
}

TEST_CASE("tightening the tolerance moves the result less than the old estimate") {
    const auto p = natural(0.35, 1.8, 4.2);
    const double coarse = l_term_numeric(p, 1e-6);
    const double fine = l_term_numeric(p, 1e-12);
    REQUIRE(std::abs(coarse - fine) <= 1e-6 * std::abs(fine));
    REQUIRE_THAT(fine, Catch::Matchers::WithinRel(l_term_closed(p), 1e-11));
}

TEST_CASE("spectral densities reject bad arguments") {
    const Integrand lt{IntegrandKind::l_term, natural(0.5, 1.0, 2.0)};
    REQUIRE_THROWS_AS(integrand_value(lt, -0.1), domain_error);
    const Integrand mp{IntegrandKind::m_plus, natural(0.5, 1.0, 0.0)};
    REQUIRE_THROWS_AS(integrand_value(mp, 1.0), degenerate_geometry_error);
    REQUIRE_THROWS_AS(m_numeric(natural(0.5, 1.0, 0.0)), degenerate_geometry_error);
}

TEST_CASE("spectral report: totals match, fractions behave") {
    const auto p = natural(0.5, 1.0, 5.0);
    const Integrand lt{IntegrandKind::l_term, p};
    const Integrand mm{IntegrandKind::m_minus, p};

    const auto full = spectral_report(lt, 0.0);
    REQUIRE_THAT(full.total, Catch::Matchers::WithinRel(l_term_closed(p), 1e-8));
    REQUIRE(full.fraction_above_cutoff == 1.0);

    const auto mm_full = spectral_report(mm, 0.0);
    REQUIRE_THAT(mm_full.total, Catch::Matchers::WithinRel(m_minus_closed(p), 1e-8));
    REQUIRE(mm_full.fraction_above_cutoff == 1.0);

    // fractions decrease with the cutoff and stay in [0, 1]
    double prev = 1.0;
    for (double kc : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto r = spectral_report(mm, kc);
        REQUIRE(r.k_cut == kc);
        REQUIRE(r.fraction_above_cutoff >= 0.0);
        REQUIRE(r.fraction_above_cutoff <= prev + 1e-12);
        prev = r.fraction_above_cutoff;
    }
    // beyond the truncation point nothing remains
    const auto none = spectral_report(lt, 1e6);
    REQUIRE(none.fraction_above_cutoff == 0.0);

    REQUIRE_THROWS_AS(spectral_report(lt, -1.0), domain_error);
}

TEST_CASE("finite-volume local term converges to the continuum") {
    const auto p = natural(0.74, 2.3, 3.9);
    const double continuum = l_term_closed(p);
    const double k_max = 14.0;  // past the integrand support
    const double scale = std::max(p.sigma, p.t_bar);
    double prev_err = 1e9;
    for (double boxes : {10.0, 20.0, 50.0}) {
        const double fv = finite_volume_l(p, boxes * scale, k_max);
        const double rel = std::abs(fv - continuum) / continuum;
        REQUIRE(rel < prev_err);
        prev_err = rel;
    }
    REQUIRE(prev_err < 0.01);  // 1% at box = 50 max(sigma, t_bar)

    REQUIRE_THROWS_AS(finite_volume_l(p, 4e3, 50.0), mode_count_error);
    REQUIRE_THROWS_AS(finite_volume_l(p, -1.0, 1.0), domain_error);
}

TEST_CASE("Bogoliubov amplitudes satisfy the symplectic identity") {
    const auto cond = derive_condensate(
        {.m_b = 87 * atomic_mass, .a_bb = 100 * bohr_radius, .rho0 = 5e20});
    for (int i = 0; i <= 40; ++i) {
        const double kxi = std::pow(10.0, -3.0 + 5.0 * i / 40.0);
        const auto pt = bogoliubov_point(kxi / cond.xi, cond);
        REQUIRE(std::abs(pt.u * pt.u - pt.v * pt.v - 1.0) < 1e-12);
        REQUIRE(pt.v <= 0.0);
        REQUIRE(pt.omega > 0.0);
    }
    REQUIRE_THROWS_AS(bogoliubov_point(0.0, cond), domain_error);
}

TEST_CASE("dispersion limits: phononic at small k, free-particle at large k") {
    const auto cond = derive_condensate(
        {.m_b = 87 * atomic_mass, .a_bb = 100 * bohr_radius, .rho0 = 5e20});

    // low k: u + v -> sqrt(hbar omega / (2 g rho0)) within 1% at k xi = 0.05
    const double k_low = 0.05 / cond.xi;
    const auto low = bogoliubov_point(k_low, cond);
    const double expected =
        std::sqrt(hbar * low.omega / (2.0 * cond.g_bb * cond.spec.rho0));
    REQUIRE_THAT(low.u + low.v, Catch::Matchers::WithinRel(expected, 0.01));

    // high k: omega -> hbar k^2 / 2 m within 1% at k xi = 20
    const double k_high = 20.0 / cond.xi;
    const auto high = bogoliubov_point(k_high, cond);
    const double free_part = hbar * k_high * k_high / (2.0 * cond.spec.m_b);
    REQUIRE_THAT(high.omega, Catch::Matchers::WithinRel(free_part, 0.01));

    // departure from the linear dispersion: pinned value at the healing scale,
    // monotone, and quadratic at small k
    REQUIRE_THAT(relativistic_error(1.0 / cond.xi, cond),
                 Catch::Matchers::WithinRel(1.0 - 1.0 / std::sqrt(1.5), 1e-12));
    double prev = 0.0;
    for (double kxi : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        const double e = relativistic_error(kxi / cond.xi, cond);
        REQUIRE(e > prev);
        REQUIRE(e < 1.0);
        prev = e;
    }
    REQUIRE_THAT(relativistic_error(0.01 / cond.xi, cond),
                 Catch::Matchers::WithinRel(0.01 * 0.01 / 4.0, 1e-3));
}

TEST_CASE("time-domain kernel reproduces the closed form for Gaussian switching") {
    const GaussianSwitching beta;
    const struct {
        long double kt, obt;
    } pts[] = {{0.0L, 0.0L}, {0.5L, 1.0L}, {1.3125L, 2.275L}, {3.0L, 5.0L}};
    for (const auto& pt : pts) {
        const auto numeric = q_beta_numeric_t(pt.kt, pt.obt, 1.0L, beta, 9.0L);
        const auto closed = q_beta_closed_t<long double>(pt.kt, pt.obt, 1.0L);
        REQUIRE(std::abs(numeric.real() - closed.real())
                <= std::max(1e-9L * std::abs(closed.real()), 1e-16L));
        REQUIRE(std::abs(numeric.imag() - closed.imag())
                <= std::max(1e-9L * std::abs(closed.imag()), 1e-16L));
    }
}

TEST_CASE("time-domain kernel matches independent 2d-quadrature pins") {
    // {kt, obt, re, im} from 30-digit mpmath of the same double integral
    const struct {
        long double kt, obt, re, im;
    } pins[] = {
        {0.0L, 0.0L, 6.28318530717958647692529L, 0.0L},
        {1.3125L, 2.275L, 0.00634299526012983045753892L, -0.0192432949332231058655798L},
        {0.5L, 1.0L, 1.80016273006841855867849L, -1.10701384165016386471879L},
        {3.0L, 5.0L, 1.07688042749159860018195e-14L, -1.75530930599618094367343e-11L},
    };
    const GaussianSwitching beta;
    for (const auto& pin : pins) {
        const auto q = q_beta_numeric_t(pin.kt, pin.obt, 1.0L, beta, 9.0L);
        REQUIRE(std::abs(q.real() - pin.re) <= std::max(1e-9L * std::abs(pin.re), 1e-16L));
        REQUIRE(std::abs(q.imag() - pin.im) <= std::max(1e-9L * std::abs(pin.im), 1e-16L));
    }
}

TEST_CASE("time-domain kernel: analytic real part for compact windows") {
    // for an even window, Re Q = F(w_sum - w_dif) F(w_sum + w_dif) with
    // F the window's Fourier transform evaluated on the real line
    struct TopHat {
        long double operator()(long double u) const {
            return std::abs(u) <= 1.0L ? 1.0L : 0.0L;
        }
        std::vector<long double> breakpoints() const { return {-1.0L, 1.0L}; }
    };
    auto f_tophat = [](long double th) {
        return th == 0.0L ? 2.0L : 2.0L * std::sin(th) / th;
    };
    const TopHat hat;
    {
        const auto q = q_beta_numeric_t(0.7L, 1.1L, 1.0L, hat, 9.0L, 1e-9L, 1e-11L);
        const long double expect = f_tophat(1.1L - 0.7L) * f_tophat(1.1L + 0.7L);
        REQUIRE(std::abs(q.real() - expect) <= 1e-8L);
    }
    {
        // k = omega_bar = 0: no phases at all, Q = (integral of beta)^2
        const auto q = q_beta_numeric_t(0.0L, 0.0L, 1.0L, hat, 9.0L, 1e-9L, 1e-11L);
        REQUIRE(std::abs(q.real() - 4.0L) <= 1e-8L);
        REQUIRE(std::abs(q.imag()) <= 1e-8L);
    }

    // triangular profile through the tabulated-path code: piecewise-linear
    // interpolation reproduces it exactly, so only quadrature error remains
    const SampledProfile tri({-2.0, 0.0, 2.0}, {0.0, 1.0, 0.0});
    auto f_tri = [](long double th) {
        return th == 0.0L ? 2.0L : 2.0L * std::sin(th) * std::sin(th) / (th * th);
    };
    const auto q = q_beta_numeric_t(0.9L, 0.6L, 1.0L, tri, 9.0L, 1e-9L, 1e-11L);
    const long double expect = f_tri(0.6L - 0.9L) * f_tri(0.6L + 0.9L);
    REQUIRE(std::abs(q.real() - expect) <= 1e-8L);
}

TEST_CASE("time-domain kernel rejects windows that clip the profile") {
    const GaussianSwitching beta;
    REQUIRE_THROWS_AS(q_beta_numeric_t(0.5L, 1.0L, 1.0L, beta, 3.0L), window_error);
    REQUIRE_THROWS_AS(q_beta_numeric_t(0.5L, 1.0L, -1.0L, beta, 9.0L), domain_error);
}

TEST_CASE("tabulated profile validation") {
    REQUIRE_THROWS_AS(SampledProfile({0.0, 1.0}, {1.0}), domain_error);
    REQUIRE_THROWS_AS(SampledProfile({0.0, 0.0}, {1.0, 1.0}), domain_error);
    REQUIRE_THROWS_AS(SampledProfile({0.0}, {1.0}), domain_error);
    const SampledProfile ok({-1.0, 0.0, 1.0}, {0.0, 2.0, 0.0});
    REQUIRE(ok(0.5L) == 1.0L);
    REQUIRE(ok(2.0L) == 0.0L);
    REQUIRE(ok(-1.0L) == 0.0L);
}

TEST_CASE("oracle results are bit-reproducible") {
    const auto p = natural(0.78833, 2.275, 5.25);
    const auto a = m_numeric(p);
    const auto b = m_numeric(p);
    REQUIRE(a.real() == b.real());
    REQUIRE(a.imag() == b.imag());
    REQUIRE(l_term_numeric(p) == l_term_numeric(p));

    const GaussianSwitching beta;
    const auto qa = q_beta_numeric_t(0.5L, 1.0L, 1.0L, beta, 9.0L);
    const auto qb = q_beta_numeric_t(0.5L, 1.0L, 1.0L, beta, 9.0L);
    REQUIRE(qa.real() == qb.real());
    REQUIRE(qa.imag() == qb.imag());
}

TEST_CASE("double-precision wrapper carries the long double result") {
    const auto p = natural(0.5, 1.0, 5.0);
    const GaussianSwitching beta;
    const double kt = 1.3125;  // k in units where t_bar = 1
    const auto q = q_beta_numeric(kt, p, beta);
    const auto closed = q_beta_closed(kt, p);
    REQUIRE_THAT(q.real(), Catch::Matchers::WithinRel(closed.real(), 1e-9));
    REQUIRE_THAT(q.imag(), Catch::Matchers::WithinRel(closed.imag(), 1e-9));
}
