#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "harvest/errors.hpp"
#include "harvest/oracle.hpp"
#include "harvest/params.hpp"
#include "harvest/response.hpp"

// Scans over one experimental knob at a time, peak refinement on the closed
// forms, per-point validity annotation, and the CSV table those feed. Every
// row is computed independently from the immutable spec and written into its
// own grid slot, so the output does not depend on the worker count.

namespace harvest {

enum class SweepVariable { omega_trap, t_switch, separation, a_ab };

struct SweepSpec {
    SweepVariable variable = SweepVariable::omega_trap;
    std::vector<double> grid;  // SI units of the scanned variable
    Scenario fixed = default_scenario();
    bool refine_peak = true;
};

struct RowValidity {
    double signaling = 0;
    double frac_l = 0;
    double frac_m_plus = 0;
    double frac_m_minus = 0;
    bool perturbative = true;
};

struct SweepRow {
    double x = 0;
    DimensionlessParams params{};
    HarvestResult result{};
    RowValidity validity{};
    std::string note;  // nonempty marks a failed point; its numbers are NaN
};

struct PeakResult {
    double x_star = std::numeric_limits<double>::quiet_NaN();
    double n_star = 0;
    double bracket_lo = 0;
    double bracket_hi = 0;
    int refinement_iters = 0;
    bool peak_found = false;
    bool bracket_degenerate = false;
};

inline Scenario with_variable(Scenario s, SweepVariable v, double x) {
    switch (v) {
        case SweepVariable::omega_trap: s.omega_trap = x; break;
        case SweepVariable::t_switch: s.t_switch = x; break;
        case SweepVariable::separation:
            // an explicit separation scan overrides the L = ratio c_s T rule
            s.geometry.separation_l = x;
            s.geometry.constraint_ratio.reset();
            break;
        case SweepVariable::a_ab: s.a_ab_bar = x; break;
    }
    return s;
}

// All observables at one parameter point. The cross correlators come from the
// closed forms; the local cross term has no closed form and runs through the
// lobed quadrature.
inline HarvestResult evaluate_point(const DimensionlessParams& p) {
    HarvestResult r;
    r.l_term = l_term_closed(p);
    r.l_cross = l_cross_closed_or_numeric(p);
    r.m_plus = m_plus_closed(p);
    r.m_minus_im = m_minus_closed(p);
    r.m_abs = std::hypot(r.m_plus, r.m_minus_im);
    r.negativity = negativity(r.l_term, r.m_abs);
    const double n_minus = std::max(0.0, std::abs(r.m_minus_im) - r.l_term);
    r.signaling = signaling_estimator(n_minus, r.negativity);
    return r;
}

namespace detail {

// Index-parallel map: workers claim indices through an atomic counter and
// write to disjoint slots. fn must not throw across the thread boundary.
template <class Fn>
void for_indices(std::size_t n, int n_threads, Fn&& fn) {
    int want = n_threads > 0 ? n_threads
                             : static_cast<int>(std::thread::hardware_concurrency());
    if (want < 1) want = 1;
    const std::size_t workers = std::min(static_cast<std::size_t>(want), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(drain);
    drain();
    for (auto& th : pool) th.join();
}

}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int n_threads = 0) {
    if (spec.grid.size() < 2)
        throw domain_error("run_sweep: grid needs at least 2 points");
    for (std::size_t i = 0; i + 1 < spec.grid.size(); ++i)
        if (!(spec.grid[i] < spec.grid[i + 1]))
            throw domain_error("run_sweep: grid must increase strictly");

    std::vector<SweepRow> rows(spec.grid.size());
    detail::for_indices(rows.size(), n_threads, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.x = spec.grid[i];
        try {
            row.params =
                scenario_params(with_variable(spec.fixed, spec.variable, row.x));
            row.result = evaluate_point(row.params);
            row.validity.signaling = row.result.signaling;
            row.validity.perturbative = row.result.l_term < 0.01;
        } catch (const std::exception& e) {
            constexpr double bad = std::numeric_limits<double>::quiet_NaN();
            row.result = {bad, bad, bad, bad, bad, bad, bad};
            row.validity = {};
            row.note = e.what();
        }
    });
    return rows;
}

// Spectral diagnostics for one row: how much of each observable lives above
// the healing-scale cutoff, and whether the point is perturbative at all.
inline SweepRow validity_annotate(SweepRow row, const DerivedCondensate& cond) {
    if (!row.note.empty() || !std::isfinite(row.result.l_term)) return row;
    const double k_cut = 1.0 / cond.xi;
    row.validity.signaling = row.result.signaling;
    row.validity.perturbative = row.result.l_term < 0.01;
    try {
        row.validity.frac_l =
            spectral_report({IntegrandKind::l_term, row.params}, k_cut)
                .fraction_above_cutoff;
        row.validity.frac_m_plus =
            spectral_report({IntegrandKind::m_plus, row.params}, k_cut)
                .fraction_above_cutoff;
        row.validity.frac_m_minus =
            spectral_report({IntegrandKind::m_minus, row.params}, k_cut)
                .fraction_above_cutoff;
    } catch (const std::exception& e) {
        row.note = e.what();
    }
    return row;
}

inline std::vector<SweepRow> annotate_rows(std::vector<SweepRow> rows,
                                           const DerivedCondensate& cond,
                                           int n_threads = 0) {
    detail::for_indices(rows.size(), n_threads, [&](std::size_t i) {
        rows[i] = validity_annotate(std::move(rows[i]), cond);
    });
    return rows;
}

// Grid argmax plus optional golden-section polish between the flanking grid
// points. The objective is re-evaluated through `objective`, and every probe
// is remembered, so the result can only improve on the best grid row.
template <class Fn>
PeakResult find_peak_with(const std::vector<SweepRow>& rows, bool refine,
                          Fn&& objective) {
    if (rows.size() < 3) throw domain_error("find_peak: need at least 3 rows");
    std::size_t best = rows.size();
    double best_n = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double n = rows[i].result.negativity;
        if (std::isfinite(n) && n > best_n) {
            best_n = n;
            best = i;
        }
    }
    PeakResult out;
    if (best == rows.size()) return out;  // nothing above zero anywhere
    out.peak_found = true;
    out.x_star = rows[best].x;
    out.n_star = best_n;
    if (best == 0 || best + 1 == rows.size()) {
        out.bracket_degenerate = true;
        out.bracket_lo = out.bracket_hi = rows[best].x;
        return out;
    }
    out.bracket_lo = rows[best - 1].x;
    out.bracket_hi = rows[best + 1].x;
    if (!refine) return out;

    auto consider = [&](double x, double n) {
        if (n > out.n_star) {
            out.n_star = n;
            out.x_star = x;
        }
    };
    constexpr double inv_phi = 0.61803398874989485;
    double a = out.bracket_lo, b = out.bracket_hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c), fd = objective(d);
    consider(c, fc);
    consider(d, fd);
    while (b - a > 1e-4 * std::max(std::abs(a), std::abs(b)) &&
           out.refinement_iters < 200) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
            consider(d, fd);
        }
        ++out.refinement_iters;
    }
    return out;
}

inline PeakResult find_peak(const SweepSpec& spec, const std::vector<SweepRow>& rows,
                            bool refine) {
    return find_peak_with(rows, refine, [&](double x) {
        const auto p = scenario_params(with_variable(spec.fixed, spec.variable, x));
        const double m = std::hypot(m_plus_closed(p), m_minus_closed(p));
        return negativity(l_term_closed(p), m);
    });
}

struct RepetitionEstimate {
    double events;
    double realizations;
};

// Shot budget for resolving the local term to a target relative error:
// Poisson counting needs 1/err^2 detection events, and each realization
// fires with probability l_term.
inline RepetitionEstimate repetition_estimate(double l_term, double target_rel_err) {
    if (!(l_term > 0) || !(l_term < 1))
        throw domain_error("repetition_estimate: l_term must lie in (0, 1)");
    if (!(target_rel_err > 0))
        throw domain_error("repetition_estimate: target error must be positive");
    const double events = std::ceil(1.0 / (target_rel_err * target_rel_err));
    return {events, std::ceil(events / l_term)};
}

namespace detail {

inline void csv_number(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

}

// One line per row, 17 significant digits (round-trip exact for doubles).
// header_comment, when nonempty, is emitted first as a '#' line: the caller
// usually passes the manifest hash of the producing configuration.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                            const std::string& header_comment = {}) {
    if (!header_comment.empty()) os << "# " << header_comment << '\n';
    os << "x,L_term,L_cross,M_plus,M_minus_im,M_abs,negativity,signaling,"
          "frac_L,frac_Mp,frac_Mm,pert_flag\n";
    for (const auto& row : rows) {
        std::string line;
        detail::csv_number(line, row.x);
        for (double v : {row.result.l_term, row.result.l_cross, row.result.m_plus,
                         row.result.m_minus_im, row.result.m_abs,
                         row.result.negativity, row.result.signaling,
                         row.validity.frac_l, row.validity.frac_m_plus,
                         row.validity.frac_m_minus}) {
            line += ',';
            detail::csv_number(line, v);
        }
        line += ',';
        line += row.validity.perturbative ? '1' : '0';
        line += '\n';
        os << line;
    }
}

// Documented reconstruction of the published scan: trap frequencies from 10
// to 45 krad/s in 0.5 krad/s steps. The upper edge stays below the region
// where the signaling estimator grows past its quoted bound.
inline std::vector<double> preset_omega_grid() {
    std::vector<double> grid(71);
    for (std::size_t j = 0; j < grid.size(); ++j)
        grid[j] = 1.0e4 + 500.0 * static_cast<double>(j);
    return grid;
}

struct SweepPreset {
    std::string name;
    std::vector<SweepSpec> sweeps;
};

// Negativity vs trap frequency for a family of pulse times. The published
// curves do not print their pulse times; this family brackets the one value
// the text does give (0.065 ms).
inline SweepPreset negativity_scan_preset() {
    SweepPreset out{"fig2", {}};
    for (double t : {5.0e-5, 6.5e-5, 8.0e-5}) {
        SweepSpec s;
        s.variable = SweepVariable::omega_trap;
        s.grid = preset_omega_grid();
        s.fixed = default_scenario();
        s.fixed.t_switch = t;
        s.refine_peak = true;
        out.sweeps.push_back(std::move(s));
    }
    return out;
}

// Signaling estimator over the same frequency scan at the documented pulse
// time.
inline SweepPreset signaling_scan_preset() {
    SweepPreset out{"fig3", {}};
    SweepSpec s;
    s.variable = SweepVariable::omega_trap;
    s.grid = preset_omega_grid();
    s.fixed = default_scenario();
    s.refine_peak = true;
    out.sweeps.push_back(std::move(s));
    return out;
}

// Momentum-space integrand profiles at the peak configuration, for plotting
// against the healing-scale marker k = 1/xi.
struct IntegrandSamples {
    DimensionlessParams params{};
    double k_cut = 0;        // 1/xi, m^-1
    std::vector<double> k;   // m^-1
    std::vector<double> l_term;
    std::vector<double> m_plus;
    std::vector<double> m_minus;
};

inline IntegrandSamples integrand_samples(const Scenario& sc = default_scenario(),
                                          std::size_t n_points = 601,
                                          double k_max = 3.0e7) {
    if (n_points < 2 || !(k_max > 0))
        throw domain_error("integrand_samples: need >= 2 points and k_max > 0");
    IntegrandSamples out;
    out.params = scenario_params(sc);
    out.k_cut = 1.0 / derive_condensate(sc.condensate).xi;
    out.k.resize(n_points);
    out.l_term.resize(n_points);
    out.m_plus.resize(n_points);
    out.m_minus.resize(n_points);
    const Integrand lt{IntegrandKind::l_term, out.params};
    const Integrand mp{IntegrandKind::m_plus, out.params};
    const Integrand mm{IntegrandKind::m_minus, out.params};
    for (std::size_t i = 0; i < n_points; ++i) {
        const double k =
            k_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
        out.k[i] = k;
        out.l_term[i] = integrand_value(lt, k);
        out.m_plus[i] = integrand_value(mp, k);
        out.m_minus[i] = integrand_value(mm, k);
    }
    return out;
}

}
