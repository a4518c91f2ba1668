#pragma once

#include <string>

#include <json.hpp>

#include "harvest/config.hpp"
#include "harvest/params.hpp"
#include "harvest/version.hpp"

// Provenance record written next to every output table: the resolved SI
// inputs, everything derived from them, the tool version and the config
// hash. The hash is over the canonical config text, so it is stable across
// runs; wall time is informational and set by the caller afterwards.

namespace harvest {

struct RunManifest {
    RunConfig config;
    DerivedCondensate condensate{};
    DimensionlessParams params{};
    double g_ab = 0;          // J m^3
    double mu_ab = 0;         // kg
    std::string tool_version = version_string;
    std::string hash;
    double wall_time_s = 0;
};

inline RunManifest make_manifest(const RunConfig& cfg) {
    RunManifest m;
    m.config = cfg;
    m.condensate = derive_condensate(cfg.scenario.condensate);
    m.params = scenario_params(cfg.scenario);
    m.mu_ab = reduced_mass(cfg.scenario.m_a, cfg.scenario.condensate.m_b);
    m.g_ab = coupling_ab(cfg.scenario.a_ab_bar, m.mu_ab);
    m.hash = config_hash(cfg);
    return m;
}

// Key order is fixed (ordered_json) so the document is reproducible modulo
// the wall_time_s field.
inline nlohmann::ordered_json manifest_json(const RunManifest& m) {
    const auto& sc = m.config.scenario;
    nlohmann::ordered_json j;
    j["tool_version"] = m.tool_version;
    j["config_hash"] = m.hash;
    j["inputs_si"] = {
        {"m_b_kg", sc.condensate.m_b},
        {"a_bb_m", sc.condensate.a_bb},
        {"rho0_m^-3", sc.condensate.rho0},
        {"m_a_kg", sc.m_a},
        {"omega_rad/s", sc.omega_trap},
        {"t_switch_s", sc.t_switch},
        {"a_ab_m", sc.a_ab_bar},
    };
    if (sc.geometry.constraint_ratio)
        j["inputs_si"]["separation_ratio"] = *sc.geometry.constraint_ratio;
    else
        j["inputs_si"]["separation_m"] = sc.geometry.separation_l;
    j["switching"] =
        m.config.switching == SwitchingKind::gaussian ? "gaussian" : "tabulated";
    if (!m.config.switching_file.empty())
        j["switching_file"] = m.config.switching_file;
    j["derived"] = {
        {"g_bb_J_m^3", m.condensate.g_bb},
        {"g_ab_J_m^3", m.g_ab},
        {"mu_ab_kg", m.mu_ab},
        {"c_s_m/s", m.condensate.c_s},
        {"xi_m", m.condensate.xi},
        {"lambda_bar_sq_m^2", m.params.lambda_bar_sq},
        {"t_bar_m", m.params.t_bar},
        {"omega_bar_m^-1", m.params.omega_bar},
        {"sigma_m", m.params.sigma},
        {"l_sep_m", m.params.l_sep},
    };
    j["tolerances"] = {
        {"oracle_rel", m.config.tolerances.oracle_rel},
        {"abs_floor", m.config.tolerances.abs_floor},
        {"k_cut_scale", m.config.tolerances.k_cut_scale},
        {"frac_m_minus_max", m.config.tolerances.frac_m_minus_max},
        {"frac_local_max", m.config.tolerances.frac_local_max},
    };
    j["wall_time_s"] = m.wall_time_s;
    return j;
}

}
