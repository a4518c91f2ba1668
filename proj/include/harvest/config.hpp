#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/errors.hpp"
#include "harvest/params.hpp"

// Line-oriented run configuration: "[section]" headers and "key = value unit"
// lines. Every physical quantity must name its unit; a bare number is only
// accepted for genuinely dimensionless keys. Frequencies must be given in
// rad/s or krad/s: Hz is refused outright, because a dropped 2 pi here is
// exactly the kind of mistake the unit table exists to catch.

namespace harvest {

enum class SwitchingKind { gaussian, tabulated };

struct CommandConfig {
    std::string subcommand;  // empty: taken from the command line
    std::string preset;      // empty: none
    std::string out;         // empty: stdout
    int threads = 0;         // 0: library decides
    bool oracle = false;

    bool operator==(const CommandConfig&) const = default;
};

struct ToleranceConfig {
    double oracle_rel = 1e-8;        // closed-form vs oracle, relative
    double abs_floor = 1e-16;        // absolute comparison floor
    double k_cut_scale = 1.0;        // validation cutoff = scale / xi
    double frac_m_minus_max = 0.07;  // allowed causal-term mass above cutoff
    double frac_local_max = 0.01;    // same for the local and vacuum terms

    bool operator==(const ToleranceConfig&) const = default;
};

// Linear scan request: which knob, over what range, how many points. Unset
// (the default) means the tool falls back to its documented frequency grid.
struct SweepConfig {
    bool set = false;
    std::string variable = "omega";  // omega | t_switch | separation | a_ab
    double from = 0;                 // SI
    double to = 0;                   // SI
    int points = 0;

    bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
    Scenario scenario = default_scenario();
    SwitchingKind switching = SwitchingKind::gaussian;
    std::string switching_file;  // two-column (t, beta) table when tabulated
    CommandConfig command;
    ToleranceConfig tolerances;
    SweepConfig sweep;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

enum class Dim { length, time, mass, density, frequency };

struct UnitInfo {
    Dim dim;
    double factor;  // multiply to get the SI base value
};

inline const std::map<std::string, UnitInfo, std::less<>>& unit_table() {
    static const std::map<std::string, UnitInfo, std::less<>> table = {
        {"m", {Dim::length, 1.0}},
        {"cm", {Dim::length, 1e-2}},
        {"nm", {Dim::length, 1e-9}},
        {"a0", {Dim::length, bohr_radius}},
        {"s", {Dim::time, 1.0}},
        {"ms", {Dim::time, 1e-3}},
        {"us", {Dim::time, 1e-6}},
        {"kg", {Dim::mass, 1.0}},
        {"u", {Dim::mass, atomic_mass}},
        {"m^-3", {Dim::density, 1.0}},
        {"cm^-3", {Dim::density, 1e6}},
        {"rad/s", {Dim::frequency, 1.0}},
        {"krad/s", {Dim::frequency, 1e3}},
    };
    return table;
}

inline const char* dim_name(Dim d) {
    switch (d) {
        case Dim::length: return "length";
        case Dim::time: return "time";
        case Dim::mass: return "mass";
        case Dim::density: return "density";
        case Dim::frequency: return "frequency";
    }
    return "?";
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view key, std::string_view token) {
    const std::string text(token);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size())
        throw config_error("config: key '" + std::string(key) +
                           "': cannot parse number '" + text + "'");
    return v;
}

// "value unit" for physical keys; checks both the presence and the dimension
// of the unit, so "m_a = 39 nm" fails as loudly as "m_a = 39".
inline double parse_quantity(std::string_view key, std::string_view rhs, Dim want) {
    const std::size_t space = rhs.find_first_of(" \t");
    if (space == std::string_view::npos) {
        if (rhs == "Hz" || rhs.ends_with("Hz"))
            throw unit_error("config: key '" + std::string(key) +
                             "': Hz is ambiguous here (2 pi), use rad/s or krad/s");
        throw unit_error("config: key '" + std::string(key) +
                         "' needs a unit (got '" + std::string(rhs) + "')");
    }
    const std::string_view num = trim(rhs.substr(0, space));
    const std::string_view unit = trim(rhs.substr(space + 1));
    if (unit == "Hz" || unit == "kHz" || unit == "2pi*kHz")
        throw unit_error("config: key '" + std::string(key) +
                         "': Hz is ambiguous here (2 pi), use rad/s or krad/s");
    const auto it = unit_table().find(unit);
    if (it == unit_table().end())
        throw unit_error("config: key '" + std::string(key) + "': unknown unit '" +
                         std::string(unit) + "'");
    if (it->second.dim != want)
        throw unit_error("config: key '" + std::string(key) + "' expects a " +
                         dim_name(want) + " unit, got '" + std::string(unit) + "'");
    return parse_number(key, num) * it->second.factor;
}

inline double parse_bare(std::string_view key, std::string_view rhs) {
    if (rhs.find_first_of(" \t") != std::string_view::npos)
        throw config_error("config: key '" + std::string(key) +
                           "' is dimensionless, got extra token in '" +
                           std::string(rhs) + "'");
    return parse_number(key, rhs);
}

inline bool parse_bool(std::string_view key, std::string_view rhs) {
    if (rhs == "true") return true;
    if (rhs == "false") return false;
    throw config_error("config: key '" + std::string(key) +
                       "' wants true or false, got '" + std::string(rhs) + "'");
}

inline void format_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}

namespace detail {

// Sweep ranges carry the dimension of the swept variable.
inline Dim sweep_dim(std::string_view variable) {
    if (variable == "omega") return Dim::frequency;
    if (variable == "t_switch") return Dim::time;
    if (variable == "separation" || variable == "a_ab") return Dim::length;
    throw config_error("config: sweep variable must be omega, t_switch, "
                       "separation or a_ab, got '" + std::string(variable) + "'");
}

}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::string section;
    std::vector<std::string> seen;
    bool saw_separation = false, saw_ratio = false;
    // [sweep] ranges are resolved after the scan: their unit check needs the
    // swept variable, which may be named later in the file.
    std::optional<std::string> sweep_from, sweep_to;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config: malformed section header '" +
                                   std::string(line) + "'");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "species" && section != "protocol" &&
                section != "geometry" && section != "command" &&
                section != "tolerances" && section != "sweep")
                throw config_error("config: unknown section [" + section + "]");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error("config: expected 'key = value' in '" +
                               std::string(line) + "'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view rhs = detail::trim(line.substr(eq + 1));
        if (key.empty() || rhs.empty())
            throw config_error("config: empty key or value in '" + std::string(line) +
                               "'");
        if (section.empty())
            throw config_error("config: key '" + key + "' appears before any section");

        const std::string qualified = section + "." + key;
        for (const auto& s : seen)
            if (s == qualified)
                throw config_error("config: duplicate key '" + qualified + "'");
        seen.push_back(qualified);

        using detail::Dim;
        auto& sc = cfg.scenario;
        if (section == "species") {
            if (key == "m_b") sc.condensate.m_b = detail::parse_quantity(key, rhs, Dim::mass);
            else if (key == "a_bb") sc.condensate.a_bb = detail::parse_quantity(key, rhs, Dim::length);
            else if (key == "rho0") sc.condensate.rho0 = detail::parse_quantity(key, rhs, Dim::density);
            else if (key == "m_a") sc.m_a = detail::parse_quantity(key, rhs, Dim::mass);
            else if (key == "omega") sc.omega_trap = detail::parse_quantity(key, rhs, Dim::frequency);
            else throw config_error("config: unknown key '" + qualified + "'");
        } else if (section == "protocol") {
            if (key == "t_switch") sc.t_switch = detail::parse_quantity(key, rhs, Dim::time);
            else if (key == "a_ab") sc.a_ab_bar = detail::parse_quantity(key, rhs, Dim::length);
            else if (key == "switching") {
                if (rhs == "gaussian") cfg.switching = SwitchingKind::gaussian;
                else if (rhs == "tabulated") cfg.switching = SwitchingKind::tabulated;
                else throw config_error("config: switching must be gaussian or tabulated");
            } else if (key == "switching_file") cfg.switching_file = std::string(rhs);
            else throw config_error("config: unknown key '" + qualified + "'");
        } else if (section == "geometry") {
            if (key == "separation") {
                sc.geometry.separation_l = detail::parse_quantity(key, rhs, Dim::length);
                sc.geometry.constraint_ratio.reset();
                saw_separation = true;
            } else if (key == "ratio") {
                sc.geometry.constraint_ratio = detail::parse_bare(key, rhs);
                saw_ratio = true;
            } else throw config_error("config: unknown key '" + qualified + "'");
        } else if (section == "command") {
            if (key == "subcommand") {
                if (rhs != "derive" && rhs != "response" && rhs != "sweep" &&
                    rhs != "validate")
                    throw config_error("config: unknown subcommand '" +
                                       std::string(rhs) + "'");
                cfg.command.subcommand = std::string(rhs);
            } else if (key == "preset") cfg.command.preset = std::string(rhs);
            else if (key == "out") cfg.command.out = std::string(rhs);
            else if (key == "threads") {
                const double t = detail::parse_bare(key, rhs);
                if (t < 0 || t != static_cast<int>(t))
                    throw config_error("config: threads must be a nonnegative integer");
                cfg.command.threads = static_cast<int>(t);
            } else if (key == "oracle") cfg.command.oracle = detail::parse_bool(key, rhs);
            else throw config_error("config: unknown key '" + qualified + "'");
        } else if (section == "tolerances") {
            auto& tol = cfg.tolerances;
            if (key == "oracle_rel") tol.oracle_rel = detail::parse_bare(key, rhs);
            else if (key == "abs_floor") tol.abs_floor = detail::parse_bare(key, rhs);
            else if (key == "k_cut_scale") tol.k_cut_scale = detail::parse_bare(key, rhs);
            else if (key == "frac_m_minus_max") tol.frac_m_minus_max = detail::parse_bare(key, rhs);
            else if (key == "frac_local_max") tol.frac_local_max = detail::parse_bare(key, rhs);
            else throw config_error("config: unknown key '" + qualified + "'");
        } else {  // sweep
            cfg.sweep.set = true;
            if (key == "variable") {
                detail::sweep_dim(rhs);  // reject unknown names here
                cfg.sweep.variable = std::string(rhs);
            } else if (key == "from") sweep_from = std::string(rhs);
            else if (key == "to") sweep_to = std::string(rhs);
            else if (key == "points") {
                const double n = detail::parse_bare(key, rhs);
                if (n < 2 || n != static_cast<int>(n))
                    throw config_error("config: sweep points must be an integer >= 2");
                cfg.sweep.points = static_cast<int>(n);
            } else throw config_error("config: unknown key '" + qualified + "'");
        }
    }

    if (cfg.sweep.set) {
        if (!sweep_from || !sweep_to || cfg.sweep.points == 0)
            throw config_error("config: [sweep] needs variable, from, to and points");
        const detail::Dim d = detail::sweep_dim(cfg.sweep.variable);
        cfg.sweep.from = detail::parse_quantity("from", *sweep_from, d);
        cfg.sweep.to = detail::parse_quantity("to", *sweep_to, d);
        if (!(cfg.sweep.to > cfg.sweep.from))
            throw config_error("config: sweep range needs to > from");
    }

    if (saw_separation && saw_ratio)
        throw config_error("config: give either geometry.separation or "
                           "geometry.ratio, not both");

    // range checks that do not wait for the physics layer
    if (!(cfg.scenario.condensate.m_b > 0) || !(cfg.scenario.m_a > 0))
        throw domain_error("config: masses must be positive");
    if (!(cfg.scenario.condensate.a_bb > 0))
        throw domain_error("config: a_bb must be positive");
    if (!(cfg.scenario.condensate.rho0 > 0))
        throw domain_error("config: rho0 must be positive");
    if (!(cfg.scenario.omega_trap > 0))
        throw domain_error("config: omega must be positive");
    if (!(cfg.scenario.t_switch > 0))
        throw domain_error("config: t_switch must be positive");
    if (cfg.scenario.geometry.constraint_ratio &&
        !(*cfg.scenario.geometry.constraint_ratio > 0))
        throw domain_error("config: ratio must be positive");
    if (!cfg.scenario.geometry.constraint_ratio &&
        cfg.scenario.geometry.separation_l < 0)
        throw domain_error("config: separation must be nonnegative");
    if (!(cfg.tolerances.oracle_rel > 0) || !(cfg.tolerances.abs_floor > 0) ||
        !(cfg.tolerances.k_cut_scale > 0))
        throw domain_error("config: tolerances must be positive");
    if (cfg.switching == SwitchingKind::tabulated && cfg.switching_file.empty())
        throw config_error("config: tabulated switching needs switching_file");
    return cfg;
}

// Canonical text form: SI base units only, 17 significant digits, fixed key
// order. parse_config(emit_config(cfg)) reproduces cfg exactly.
inline std::string emit_config(const RunConfig& cfg) {
    std::string out;
    auto emit = [&](const char* key, double v, const char* unit) {
        out += key;
        out += " = ";
        detail::format_number(out, v);
        if (*unit) {
            out += ' ';
            out += unit;
        }
        out += '\n';
    };
    const auto& sc = cfg.scenario;
    out += "[species]\n";
    emit("m_b", sc.condensate.m_b, "kg");
    emit("a_bb", sc.condensate.a_bb, "m");
    emit("rho0", sc.condensate.rho0, "m^-3");
    emit("m_a", sc.m_a, "kg");
    emit("omega", sc.omega_trap, "rad/s");
    out += "[protocol]\n";
    emit("t_switch", sc.t_switch, "s");
    emit("a_ab", sc.a_ab_bar, "m");
    out += "switching = ";
    out += cfg.switching == SwitchingKind::gaussian ? "gaussian" : "tabulated";
    out += '\n';
    if (!cfg.switching_file.empty())
        out += "switching_file = " + cfg.switching_file + "\n";
    out += "[geometry]\n";
    if (sc.geometry.constraint_ratio)
        emit("ratio", *sc.geometry.constraint_ratio, "");
    else
        emit("separation", sc.geometry.separation_l, "m");
    out += "[command]\n";
    if (!cfg.command.subcommand.empty())
        out += "subcommand = " + cfg.command.subcommand + "\n";
    if (!cfg.command.preset.empty()) out += "preset = " + cfg.command.preset + "\n";
    if (!cfg.command.out.empty()) out += "out = " + cfg.command.out + "\n";
    out += "threads = ";
    out += std::to_string(cfg.command.threads);
    out += "\noracle = ";
    out += cfg.command.oracle ? "true" : "false";
    out += '\n';
    out += "[tolerances]\n";
    emit("oracle_rel", cfg.tolerances.oracle_rel, "");
    emit("abs_floor", cfg.tolerances.abs_floor, "");
    emit("k_cut_scale", cfg.tolerances.k_cut_scale, "");
    emit("frac_m_minus_max", cfg.tolerances.frac_m_minus_max, "");
    emit("frac_local_max", cfg.tolerances.frac_local_max, "");
    if (cfg.sweep.set) {
        const detail::Dim d = detail::sweep_dim(cfg.sweep.variable);
        const char* unit = d == detail::Dim::frequency ? "rad/s"
                         : d == detail::Dim::time      ? "s"
                                                       : "m";
        out += "[sweep]\nvariable = " + cfg.sweep.variable + "\n";
        emit("from", cfg.sweep.from, unit);
        emit("to", cfg.sweep.to, unit);
        out += "points = " + std::to_string(cfg.sweep.points) + "\n";
    }
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Hash of the canonical text, so two configs that resolve to the same run
// share a hash no matter how they were spelled. Worker count and output
// destination are erased first: they cannot change a single output byte, and
// a reproducibility stamp that varied with them would defeat its purpose.
inline std::string config_hash(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.command.threads = 0;
    c.command.out.clear();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(emit_config(c))));
    return buf;
}

}
