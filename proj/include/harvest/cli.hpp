#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "harvest/config.hpp"
#include "harvest/manifest.hpp"
#include "harvest/oracle.hpp"
#include "harvest/response.hpp"
#include "harvest/sweep.hpp"

// Subcommand bodies, kept out of main() so they can be driven in-process.
// Each returns the text artifacts it produced; the binary decides whether
// they land on stdout or in files. Nothing here touches the filesystem
// except load_profile, which reads a stream the caller opened.

namespace harvest {

struct CommandOutput {
    std::string primary;  // table, CSV, or report text
    // extra artifacts as (suffix, content); written as <out>.<suffix>
    std::vector<std::pair<std::string, std::string>> side;
    std::optional<RunManifest> manifest;
    int exit_code = 0;
};

// Two-column whitespace table of (t, beta) samples, '#' comments allowed.
// Times are physical seconds; the caller rescales to pulse units.
inline SampledProfile load_profile(std::istream& in) {
    std::vector<double> t, v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream row(line);
        double a, b;
        if (!(row >> a)) continue;  // blank or comment-only line
        double extra;
        if (!(row >> b) || (row >> extra))
            throw config_error("switching table line " + std::to_string(lineno) +
                               ": expected exactly two columns");
        t.push_back(a);
        v.push_back(b);
    }
    return SampledProfile(std::move(t), std::move(v));
}

namespace detail {

// |closed - numeric| scaled so that a value of oracle_rel marks exactly the
// acceptance boundary max(oracle_rel |closed|, abs_floor).
inline double oracle_deviation(double closed, double numeric,
                               const ToleranceConfig& tol) {
    const double scale = std::max(std::abs(closed), tol.abs_floor / tol.oracle_rel);
    return std::abs(closed - numeric) / scale;
}

inline void table_row(std::string& out, const char* name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-20s %.17g\n", name, v);
    out += buf;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        grid[static_cast<std::size_t>(j)] = a + (b - a) * j / (n - 1);
    return grid;
}

inline SweepVariable variable_from_name(const std::string& name) {
    if (name == "omega") return SweepVariable::omega_trap;
    if (name == "t_switch") return SweepVariable::t_switch;
    if (name == "separation") return SweepVariable::separation;
    return SweepVariable::a_ab;  // parse_config admits nothing else
}

// Representative wavenumber for the single-mode kernel checks: a quarter of
// the separation phase, mid-regime for every documented configuration.
inline double representative_k(const DimensionlessParams& p) {
    return p.l_sep > 0 ? p.l_sep / (4.0 * p.t_bar * p.t_bar) : 1.0 / p.t_bar;
}

}

inline CommandOutput cmd_derive(const RunConfig& cfg) {
    CommandOutput out;
    out.manifest = make_manifest(cfg);
    const auto& m = *out.manifest;
    const auto& sc = cfg.scenario;
    std::string& t = out.primary;
    detail::table_row(t, "c_s_m/s", m.condensate.c_s);
    detail::table_row(t, "xi_m", m.condensate.xi);
    detail::table_row(t, "g_bb_J_m^3", m.condensate.g_bb);
    detail::table_row(t, "g_ab_J_m^3", m.g_ab);
    detail::table_row(t, "mu_ab_kg", m.mu_ab);
    detail::table_row(t, "sigma_m", m.params.sigma);
    detail::table_row(t, "lambda_bar_sq_m^2", m.params.lambda_bar_sq);
    detail::table_row(t, "t_bar_m", m.params.t_bar);
    detail::table_row(t, "omega_bar_m^-1", m.params.omega_bar);
    detail::table_row(t, "l_sep_m", m.params.l_sep);
    detail::table_row(t, "sigma_over_c_s_T",
                      m.params.sigma / (m.condensate.c_s * sc.t_switch));
    return out;
}

inline CommandOutput cmd_response(const RunConfig& cfg) {
    if (cfg.switching == SwitchingKind::tabulated)
        throw config_error(
            "response: observables assume the gaussian window; tabulated "
            "profiles feed the validate kernel check only");
    CommandOutput out;
    out.manifest = make_manifest(cfg);
    SweepRow row;
    row.x = cfg.scenario.omega_trap;
    row.params = out.manifest->params;
    row.result = evaluate_point(row.params);
    row = validity_annotate(std::move(row), out.manifest->condensate);

    std::ostringstream os;
    std::vector<SweepRow> rows{row};
    if (!cfg.command.oracle) {
        write_sweep_csv(os, rows, "manifest " + out.manifest->hash);
    } else {
        const auto& p = row.params;
        const std::complex<double> m_num = m_numeric(p);
        double dev = detail::oracle_deviation(row.result.l_term,
                                              l_term_numeric(p), cfg.tolerances);
        dev = std::max(dev, detail::oracle_deviation(row.result.m_plus,
                                                     m_num.real(), cfg.tolerances));
        dev = std::max(dev, detail::oracle_deviation(row.result.m_minus_im,
                                                     m_num.imag(), cfg.tolerances));
        std::ostringstream base;
        write_sweep_csv(base, rows, "manifest " + out.manifest->hash);
        std::string text = base.str();
        // widen header and the single data row by the deviation column
        const std::size_t header_end = text.find("pert_flag\n");
        text.insert(header_end + 9, ",max_rel_dev");
        text.pop_back();
        text += ',';
        detail::csv_number(text, dev);
        text += '\n';
        os << text;
    }
    out.primary = os.str();
    return out;
}

namespace detail {

inline std::string peak_comment(const std::string& hash, const SweepSpec& s,
                                const PeakResult& pk) {
    std::string c = "manifest " + hash;
    char buf[96];
    if (s.variable != SweepVariable::t_switch) {
        std::snprintf(buf, sizeof buf, " | t_switch_s = %.17g", s.fixed.t_switch);
        c += buf;
    }
    if (pk.peak_found) {
        std::snprintf(buf, sizeof buf,
                      " | peak x = %.17g negativity = %.17g degenerate = %d",
                      pk.x_star, pk.n_star, pk.bracket_degenerate ? 1 : 0);
        c += buf;
    } else {
        c += " | no interior peak";
    }
    return c;
}

inline void dat_row(std::string& out, const std::vector<double>& cols) {
    char buf[40];
    for (std::size_t i = 0; i < cols.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", cols[i]);
        if (i) out += ' ';
        out += buf;
    }
    out += '\n';
}

}

// Scan driver. Presets reproduce the documented scans but inherit the species
// block and the contact length from the config, so the same scan can be rerun
// on a variant mixture; their pulse times, geometry rule and grids are pinned.
// Without a preset the [sweep] block decides, and without that the default is
// the documented frequency grid on the configured scenario.
inline CommandOutput cmd_sweep(const RunConfig& cfg) {
    if (cfg.switching == SwitchingKind::tabulated)
        throw config_error(
            "sweep: observables assume the gaussian window; tabulated "
            "profiles feed the validate kernel check only");
    const std::string& preset = cfg.command.preset;
    if (!preset.empty() && preset != "fig2" && preset != "fig3" && preset != "fig4")
        throw config_error("sweep: unknown preset '" + preset +
                           "' (expected fig2, fig3 or fig4)");
    CommandOutput out;
    out.manifest = make_manifest(cfg);
    const std::string& hash = out.manifest->hash;
    const int threads = cfg.command.threads;

    if (preset == "fig4") {
        // integrand profiles, momenta reported in nm^-1 against the healing
        // scale marker
        const IntegrandSamples s = integrand_samples(cfg.scenario);
        std::string& csv = out.primary;
        csv = "# manifest " + hash + "\n# k_cut_nm^-1 = ";
        detail::csv_number(csv, s.k_cut * 1e-9);
        csv += "\nk_nm^-1,l_term_density,m_plus_density,m_minus_density\n";
        std::string dat;
        for (std::size_t i = 0; i < s.k.size(); ++i) {
            std::string line;
            detail::csv_number(line, s.k[i] * 1e-9);
            for (double v : {s.l_term[i], s.m_plus[i], s.m_minus[i]}) {
                line += ',';
                detail::csv_number(line, v);
            }
            csv += line;
            csv += '\n';
            detail::dat_row(dat, {s.k[i] * 1e-9, s.l_term[i], s.m_plus[i],
                                  s.m_minus[i]});
        }
        out.side.emplace_back("plot.dat", std::move(dat));
        return out;
    }

    // the remaining modes all run sweeps of SweepSpec form
    std::vector<SweepSpec> specs;
    if (preset == "fig2" || preset == "fig3") {
        SweepPreset pr =
            preset == "fig2" ? negativity_scan_preset() : signaling_scan_preset();
        for (auto& s : pr.sweeps) {
            s.fixed.condensate = cfg.scenario.condensate;
            s.fixed.m_a = cfg.scenario.m_a;
            s.fixed.a_ab_bar = cfg.scenario.a_ab_bar;
            specs.push_back(std::move(s));
        }
    } else if (cfg.sweep.set) {
        SweepSpec s;
        s.variable = detail::variable_from_name(cfg.sweep.variable);
        s.grid = detail::linspace(cfg.sweep.from, cfg.sweep.to, cfg.sweep.points);
        s.fixed = cfg.scenario;
        specs.push_back(std::move(s));
    } else {
        SweepSpec s;
        s.grid = preset_omega_grid();
        s.fixed = cfg.scenario;
        specs.push_back(std::move(s));
    }

    std::vector<std::vector<SweepRow>> all_rows;
    std::string plot;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        auto rows = run_sweep(s, threads);
        rows = annotate_rows(std::move(rows),
                             derive_condensate(s.fixed.condensate), threads);
        const PeakResult pk = find_peak(s, rows, s.refine_peak);
        std::ostringstream os;
        write_sweep_csv(os, rows, detail::peak_comment(hash, s, pk));
        if (i == 0)
            out.primary = os.str();
        else
            out.side.emplace_back("t" + std::to_string(i) + ".csv", os.str());
        all_rows.push_back(std::move(rows));
    }

    // plot companion: frequency scans get x, negativity per sweep, and the
    // signaling column of the first sweep
    const std::size_t n = all_rows[0].size();
    bool aligned = true;
    for (const auto& rows : all_rows)
        if (rows.size() != n) aligned = false;
    if (aligned) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> cols{all_rows[0][j].x};
            for (const auto& rows : all_rows)
                cols.push_back(rows[j].result.negativity);
            cols.push_back(all_rows[0][j].result.signaling);
            detail::dat_row(plot, cols);
        }
        out.side.emplace_back("plot.dat", std::move(plot));
    }
    return out;
}

namespace detail {

struct CheckLog {
    std::string text;
    int failures = 0;
    int total = 0;

    void check(const char* name, bool pass, const std::string& detail) {
        ++total;
        text += "check ";
        text += name;
        text += pass ? ": PASS" : ": FAIL";
        if (!detail.empty()) {
            text += " (";
            text += detail;
            text += ')';
        }
        text += '\n';
        if (!pass) ++failures;
    }

    void info(const std::string& line) {
        text += "info: ";
        text += line;
        text += '\n';
    }
};

inline std::string fmt(const char* pattern, double a, double b = 0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

}

// Cross-checks the configured point: closed forms against the spectral
// oracle, the single-mode kernel against its time-domain integral, spectral
// mass above the healing cutoff against the validity budget, and the
// continuum local term against a finite box. Exit code counts failures.
inline CommandOutput cmd_validate(const RunConfig& cfg,
                                  std::istream* switching_table = nullptr) {
    CommandOutput out;
    out.manifest = make_manifest(cfg);
    const DimensionlessParams& p = out.manifest->params;
    const DerivedCondensate& cond = out.manifest->condensate;
    const ToleranceConfig& tol = cfg.tolerances;
    detail::CheckLog log;
    log.text = "validate: manifest " + out.manifest->hash + "\n";

    const double dev_l =
        detail::oracle_deviation(l_term_closed(p), l_term_numeric(p), tol);
    const std::complex<double> m_num = m_numeric(p);
    const double dev_mp = detail::oracle_deviation(m_plus_closed(p), m_num.real(), tol);
    const double dev_mm =
        detail::oracle_deviation(m_minus_closed(p), m_num.imag(), tol);
    log.check("closed_vs_oracle_L", dev_l <= tol.oracle_rel,
              detail::fmt("scaled deviation %.3g vs %.3g", dev_l, tol.oracle_rel));
    log.check("closed_vs_oracle_M_plus", dev_mp <= tol.oracle_rel,
              detail::fmt("scaled deviation %.3g vs %.3g", dev_mp, tol.oracle_rel));
    log.check("closed_vs_oracle_M_minus", dev_mm <= tol.oracle_rel,
              detail::fmt("scaled deviation %.3g vs %.3g", dev_mm, tol.oracle_rel));

    const double k_rep = detail::representative_k(p);
    if (cfg.switching == SwitchingKind::gaussian) {
        const std::complex<double> qc = q_beta_closed(k_rep, p);
        const std::complex<double> qn = q_beta_numeric(k_rep, p, GaussianSwitching{});
        const double dev_q = std::abs(qc - qn);
        log.check("switching_kernel", dev_q <= 1e-6,
                  detail::fmt("absolute deviation %.3g vs 1e-06", dev_q));
    } else {
        // tabulated window: rescale the table to pulse units and run the
        // time-domain kernel; the closed form does not apply
        if (switching_table == nullptr)
            throw config_error("validate: tabulated switching needs the table stream");
        SampledProfile raw = load_profile(*switching_table);
        std::vector<double> u(raw.t.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = raw.t[i] / cfg.scenario.t_switch;
        const SampledProfile beta(std::move(u), std::move(raw.value));
        const double window =
            std::max(std::abs(beta.t.front()), std::abs(beta.t.back()));
        const std::complex<double> qn =
            q_beta_numeric(k_rep, p, beta, window);
        log.check("switching_kernel",
                  std::isfinite(qn.real()) && std::isfinite(qn.imag()),
                  detail::fmt("tabulated kernel = %.6g + %.6gi", qn.real(),
                              qn.imag()));
    }

    const double k_cut = tol.k_cut_scale / cond.xi;
    const SpectralReport rl =
        spectral_report({IntegrandKind::l_term, p}, k_cut);
    const SpectralReport rp =
        spectral_report({IntegrandKind::m_plus, p}, k_cut);
    const SpectralReport rm =
        spectral_report({IntegrandKind::m_minus, p}, k_cut);
    log.check("spectral_fraction_L", rl.fraction_above_cutoff <= tol.frac_local_max,
              detail::fmt("%.4g of the mass above the cutoff, budget %.3g",
                          rl.fraction_above_cutoff, tol.frac_local_max));
    log.check("spectral_fraction_M_plus",
              rp.fraction_above_cutoff <= tol.frac_local_max,
              detail::fmt("%.4g of the mass above the cutoff, budget %.3g",
                          rp.fraction_above_cutoff, tol.frac_local_max));
    log.check("spectral_fraction_M_minus",
              rm.fraction_above_cutoff <= tol.frac_m_minus_max,
              detail::fmt("%.4g of the mass above the cutoff, budget %.3g",
                          rm.fraction_above_cutoff, tol.frac_m_minus_max));
    log.info(detail::fmt("dispersion deviates %.4g from linear at the healing "
                         "scale; the checked cutoff sits at %.4g of it",
                         relativistic_error(1.0 / cond.xi, cond),
                         tol.k_cut_scale));

    const double box = 50.0 * std::max(p.sigma, p.t_bar);
    const double k_max = detail::k_upper(IntegrandKind::l_term, p);
    const double l_cont = l_term_closed(p);
    const double fv = finite_volume_l(p, box, k_max);
    const double fv_rel = std::abs(fv - l_cont) / l_cont;
    log.check("finite_volume_L", fv_rel <= 0.01,
              detail::fmt("box sum off by %.3g relative, budget 0.01", fv_rel));

    log.text += "validate: " + std::to_string(log.failures) + " of " +
                std::to_string(log.total) + " checks failed\n";
    out.primary = std::move(log.text);
    out.exit_code = log.failures == 0 ? 0 : 1;
    return out;
}

}
