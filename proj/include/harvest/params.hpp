#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include <harvest/constants.hpp>
#include <harvest/errors.hpp>

// Maps experimental atomic-physics inputs (masses, scattering lengths, density,
// trap frequency, pulse time) onto the handful of lengths the observables
// consume. All "dimensionless" detector parameters carry meters: time and
// frequency are rescaled by the sound speed once, here, and nowhere else.

namespace harvest {

struct CondensateSpec {
    double m_b;   // kg
    double a_bb;  // m
    double rho0;  // m^-3

    bool operator==(const CondensateSpec&) const = default;
};

struct DerivedCondensate {
    CondensateSpec spec;
    double g_bb;  // J m^3
    double c_s;   // m/s
    double xi;    // m
};

struct DetectorSpec {
    double m_a;         // kg
    double omega_trap;  // rad/s
    double a_ab_bar;    // m; may be zero (Feshbach zero crossing) or negative
    double t_switch;    // s
    double sigma;       // m; sqrt(hbar/(m_a omega_trap)), see make_detector
};

struct PairGeometry {
    double separation_l = 0;                                // m
    std::optional<double> constraint_ratio = std::nullopt;  // L = ratio * c_s * T

    bool operator==(const PairGeometry&) const = default;
};

// Everything downstream reads only these five numbers.
struct DimensionlessParams {
    double lambda_bar_sq;  // m^2, g_ab^2/(g_bb hbar c_s)
    double t_bar;          // m, c_s T
    double omega_bar;      // m^-1, Omega/c_s
    double sigma;          // m
    double l_sep;          // m
};

inline double reduced_mass(double m_a, double m_b) {
    if (m_a <= 0 || m_b <= 0)
        throw domain_error("reduced_mass: masses must be positive");
    return m_a * m_b / (m_a + m_b);
}

inline double coupling_bb(double a_bb, double m_b) {
    if (a_bb <= 0 || m_b <= 0)
        throw domain_error("coupling_bb: inputs must be positive");
    return 4.0 * std::numbers::pi * hbar * hbar * a_bb / m_b;
}

// Sign follows a_ab; zero allowed (decoupled probes).
inline double coupling_ab(double a_ab, double mu_ab) {
    if (mu_ab <= 0)
        throw domain_error("coupling_ab: reduced mass must be positive");
    return 2.0 * std::numbers::pi * hbar * hbar * a_ab / mu_ab;
}

inline DerivedCondensate derive_condensate(const CondensateSpec& spec) {
    if (spec.rho0 <= 0)
        throw domain_error("derive_condensate: density must be positive");
    const double g_bb = coupling_bb(spec.a_bb, spec.m_b);
    const double c_s = std::sqrt(g_bb * spec.rho0 / spec.m_b);
    const double xi = hbar / (std::numbers::sqrt2 * spec.m_b * c_s);
    return {spec, g_bb, c_s, xi};
}

inline double trap_width(double m_a, double omega_trap) {
    if (m_a <= 0 || omega_trap <= 0)
        throw domain_error("trap_width: mass and frequency must be positive");
    return std::sqrt(hbar / (m_a * omega_trap));
}

inline DetectorSpec make_detector(double m_a, double omega_trap, double a_ab_bar,
                                  double t_switch) {
    if (t_switch <= 0)
        throw domain_error("make_detector: switching time must be positive");
    return {m_a, omega_trap, a_ab_bar, t_switch, trap_width(m_a, omega_trap)};
}

inline DimensionlessParams to_dimensionless(const DerivedCondensate& cond,
                                            const DetectorSpec& det,
                                            const PairGeometry& geom) {
    const double mu = reduced_mass(det.m_a, cond.spec.m_b);
    const double g_ab = coupling_ab(det.a_ab_bar, mu);
    const double lambda_bar_sq = g_ab * g_ab / (cond.g_bb * hbar * cond.c_s);
    const double t_bar = cond.c_s * det.t_switch;
    // sigma always recomputed from (m_a, omega) so sweeps over omega stay consistent
    const double sigma = trap_width(det.m_a, det.omega_trap);
    const double l_sep =
        geom.constraint_ratio ? *geom.constraint_ratio * t_bar : geom.separation_l;
    if (l_sep < 0)
        throw domain_error("to_dimensionless: separation must be nonnegative");
    return {lambda_bar_sq, t_bar, det.omega_trap / cond.c_s, sigma, l_sep};
}

// One complete experiment description, raw inputs only; everything derived
// (sound speed, trap width, couplings) is recomputed from it on demand.
struct Scenario {
    CondensateSpec condensate{};
    double m_a = 0;         // kg
    double omega_trap = 0;  // rad/s
    double a_ab_bar = 0;    // m
    double t_switch = 0;    // s
    PairGeometry geometry{};

    bool operator==(const Scenario&) const = default;
};

inline DimensionlessParams scenario_params(const Scenario& s) {
    const auto cond = derive_condensate(s.condensate);
    const auto det = make_detector(s.m_a, s.omega_trap, s.a_ab_bar, s.t_switch);
    return to_dimensionless(cond, det, s.geometry);
}

// K-39 impurities in a Rb-87 condensate at the documented working point:
// peak density 5e14 cm^-3, a_bb = 100 a0, a_ab at its Feshbach maximum,
// 35 krad/s trap, 0.065 ms pulse, separation pinned to 5.25 c_s T.
inline Scenario default_scenario() {
    Scenario s;
    s.condensate = {87.0 * atomic_mass, 100.0 * bohr_radius, 5e20};
    s.m_a = 39.0 * atomic_mass;
    s.omega_trap = 35.0e3;
    s.a_ab_bar = 1000.0 * bohr_radius;
    s.t_switch = 6.5e-5;
    s.geometry.constraint_ratio = 5.25;
    return s;
}

// Equivalent genuinely relativistic detector: same response, light speed c.
struct UdwEquivalent {
    double lambda;     // sqrt(c/c_s) g_ab / sqrt(g_bb)
    double omega_udw;  // (c/c_s) Omega, rad/s
    double t_udw;      // (c_s/c) T, s
};

inline UdwEquivalent udw_equivalent(const DimensionlessParams& p,
                                    const DerivedCondensate& cond,
                                    double c = c_light) {
    const double boost = c / cond.c_s;
    const double g_ab = std::sqrt(p.lambda_bar_sq * cond.g_bb * hbar * cond.c_s);
    return {std::sqrt(boost) * g_ab / std::sqrt(cond.g_bb),
            boost * p.omega_bar * cond.c_s, (p.t_bar / cond.c_s) / boost};
}

struct UdwInverse {
    double lambda_bar_sq;  // m^2
    double omega_trap;     // rad/s
    double t_switch;       // s
};

inline UdwInverse udw_inverse(const UdwEquivalent& u, double c_s, double c = c_light) {
    const double boost = c / c_s;
    return {u.lambda * u.lambda / (hbar * c), u.omega_udw / boost, u.t_udw * boost};
}

}
