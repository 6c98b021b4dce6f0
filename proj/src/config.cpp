#include "therminv/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "therminv/errors.hpp"

namespace therminv {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(in, nullptr, true, true);  // with comments
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
}

/// Unknown keys are configuration errors, not typos to ignore.
void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    require_object(j, where);
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + where + "." + key + "'");
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError("config: " + where + " must be a number");
    return j.get<double>();
}

double num_or(const json& j, const char* key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return num(j.at(key), where + "." + key);
}

int int_or(const json& j, const char* key, int fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError("config: " + where + "." + key + " must be an integer");
    return v.get<int>();
}

std::uint64_t seed_or(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError("config: " + where + "." + key + " must be an unsigned integer");
    return v.get<std::uint64_t>();
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError("config: " + where + "." + key + " must be a boolean");
    return v.get<bool>();
}

MaterialLayer parse_layer(const json& j, const std::string& where, double thickness) {
    check_keys(j, where, {"k0", "k1", "c0", "c1"});
    MaterialLayer layer;
    layer.k0 = num(j.at("k0"), where + ".k0");
    layer.k1 = num_or(j, "k1", 0.0, where);
    layer.c0 = num(j.at("c0"), where + ".c0");
    layer.c1 = num_or(j, "c1", 0.0, where);
    layer.thickness = thickness;
    return layer;
}

PriorParam parse_prior_param(const json& j, const std::string& where) {
    check_keys(j, where, {"family", "lo", "hi", "mean", "std"});
    PriorParam p;
    const std::string family = j.value("family", "uniform");
    if (family == "uniform") {
        p.family = PriorFamily::uniform;
    } else if (family == "gaussian") {
        p.family = PriorFamily::gaussian;
    } else {
        throw ConfigError("config: " + where + ".family must be 'uniform' or 'gaussian'");
    }
    p.lo = num(j.at("lo"), where + ".lo");
    p.hi = num(j.at("hi"), where + ".hi");
    p.mean = num_or(j, "mean", 0.5 * (p.lo + p.hi), where);
    p.std = num_or(j, "std", 1.0, where);
    p.validate(where);
    return p;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    const json j = parse_file(path);
    check_keys(j, "<root>",
               {"geometry", "layers", "scales", "schedule", "initial_temperature_C", "mode",
                "sensors", "observation", "apriori", "solver1d", "solver2d", "diagnostics",
                "prior", "mcmc", "aem"});

    RunConfig cfg;

    {
        const json& g = j.at("geometry");
        check_keys(g, "geometry",
                   {"L0x_m", "L0y_m", "L0z_m", "interface_x_m", "aluminum_thickness_m"});
        cfg.geometry.L0x = num(g.at("L0x_m"), "geometry.L0x_m");
        cfg.geometry.L0y = num(g.at("L0y_m"), "geometry.L0y_m");
        cfg.geometry.L0z = num_or(g, "L0z_m", cfg.geometry.L0y, "geometry");
        const double xi = num(g.at("interface_x_m"), "geometry.interface_x_m");
        cfg.geometry.layer_boundaries = {0.0, xi, cfg.geometry.L0x};
        cfg.geometry.aluminum_thickness = num_or(g, "aluminum_thickness_m", 1e-4, "geometry");
        cfg.geometry.validate();
    }
    {
        const json& l = j.at("layers");
        check_keys(l, "layers", {"wood_fiber", "insulator", "aluminum"});
        const double xi = cfg.geometry.interface_x();
        cfg.wood_fiber = parse_layer(l.at("wood_fiber"), "layers.wood_fiber", xi);
        cfg.insulator =
            parse_layer(l.at("insulator"), "layers.insulator", cfg.geometry.L0x - xi);
        cfg.aluminum = parse_layer(l.at("aluminum"), "layers.aluminum",
                                   cfg.geometry.aluminum_thickness > 0
                                       ? cfg.geometry.aluminum_thickness
                                       : 1e-4);
    }
    {
        const json& s = j.at("scales");
        check_keys(s, "scales", {"T0_C", "t0_s"});
        cfg.scales.T0 = num(s.at("T0_C"), "scales.T0_C");
        cfg.scales.t0 = num(s.at("t0_s"), "scales.t0_s");
        cfg.scales.L0x = cfg.geometry.L0x;
        cfg.scales.validate();
    }
    {
        const json& s = j.at("schedule");
        if (!s.is_array() || s.empty())
            throw ConfigError("config: schedule must be a non-empty array of [t_s, T_C] pairs");
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : s) {
            if (!row.is_array() || row.size() != 2)
                throw ConfigError("config: schedule entries must be [t_s, T_C] pairs");
            pts.emplace_back(num(row[0], "schedule.t_s"), num(row[1], "schedule.T_C"));
        }
        cfg.schedule = BoundarySchedule(std::move(pts));
    }
    cfg.initial_temperature_C = num_or(j, "initial_temperature_C", 20.0, "<root>");
    {
        const std::string mode = j.value("mode", "robin");
        if (mode == "robin") cfg.mode = BoundaryMode::robin;
        else if (mode == "dirichlet-top") cfg.mode = BoundaryMode::dirichlet_top;
        else throw ConfigError("config: mode must be 'robin' or 'dirichlet-top'");
    }
    {
        const json& s = j.at("sensors");
        if (!s.is_array() || s.empty()) throw ConfigError("config: sensors must be a non-empty array");
        for (const auto& e : s) {
            check_keys(e, "sensors[]", {"id", "x_m"});
            Sensor sensor;
            if (!e.contains("id") || !e.at("id").is_string())
                throw ConfigError("config: sensors[].id must be a string");
            sensor.id = e.at("id").get<std::string>();
            sensor.x_m = num(e.at("x_m"), "sensors[].x_m");
            if (sensor.x_m < 0 || sensor.x_m > cfg.geometry.L0x)
                throw ConfigError("config: sensor '" + sensor.id + "' lies outside the domain");
            cfg.sensors.push_back(std::move(sensor));
        }
    }
    if (j.contains("observation")) {
        const json& o = j.at("observation");
        check_keys(o, "observation",
                   {"dt_s", "sigma_s_C", "position_uncertainty_m", "n_repeats", "sample_variance"});
        cfg.observation.dt_s = num_or(o, "dt_s", 60.0, "observation");
        cfg.observation.sigma_s_C = num_or(o, "sigma_s_C", 0.3, "observation");
        cfg.observation.position_uncertainty_m = num_or(o, "position_uncertainty_m", 0.005, "observation");
        cfg.observation.n_repeats = int_or(o, "n_repeats", 3, "observation");
        cfg.observation.sample_variance = bool_or(o, "sample_variance", false, "observation");
        if (cfg.observation.dt_s <= 0) throw ConfigError("config: observation.dt_s must be > 0");
        if (cfg.observation.n_repeats < 1)
            throw ConfigError("config: observation.n_repeats must be >= 1");
    }
    if (j.contains("apriori")) {
        const json& a = j.at("apriori");
        check_keys(a, "apriori", {"h_t", "R_l"});
        cfg.apriori_h_t = num_or(a, "h_t", 8.0, "apriori");
        cfg.apriori_R_l = num_or(a, "R_l", 0.5, "apriori");
    }
    if (j.contains("solver1d")) {
        const json& s = j.at("solver1d");
        check_keys(s, "solver1d", {"n_nodes", "abs_tol", "rel_tol", "max_step"});
        cfg.n_nodes = int_or(s, "n_nodes", 101, "solver1d");
        cfg.controls.abs_tol = num_or(s, "abs_tol", 1e-3, "solver1d");
        cfg.controls.rel_tol = num_or(s, "rel_tol", 1e-3, "solver1d");
        cfg.controls.max_step = num_or(s, "max_step", 0.05, "solver1d");
        cfg.controls.validate();
    }
    if (j.contains("solver2d")) {
        const json& s = j.at("solver2d");
        check_keys(s, "solver2d",
                   {"dt_s", "resolution_m", "tape_cells", "snapshot_dt_s", "diagnostics_dt_s"});
        cfg.solver2d.dt_s = num_or(s, "dt_s", 0.5, "solver2d");
        cfg.solver2d.resolution_m = num_or(s, "resolution_m", 2e-3, "solver2d");
        cfg.solver2d.tape_cells = int_or(s, "tape_cells", 3, "solver2d");
        cfg.solver2d.snapshot_dt_s = num_or(s, "snapshot_dt_s", 3600.0, "solver2d");
        cfg.solver2d.diagnostics_dt_s = num_or(s, "diagnostics_dt_s", 300.0, "solver2d");
    }
    if (j.contains("diagnostics")) {
        const json& d = j.at("diagnostics");
        check_keys(d, "diagnostics", {"flux_x_lo_m", "flux_x_hi_m"});
        cfg.diagnostics.flux_x_lo_m = num_or(d, "flux_x_lo_m", 0.0, "diagnostics");
        cfg.diagnostics.flux_x_hi_m = num_or(d, "flux_x_hi_m", 0.048, "diagnostics");
    }
    if (j.contains("prior")) {
        const json& p = j.at("prior");
        check_keys(p, "prior", {"h_t", "R_l"});
        if (p.contains("h_t")) cfg.prior.h_t = parse_prior_param(p.at("h_t"), "prior.h_t");
        if (p.contains("R_l")) cfg.prior.R_l = parse_prior_param(p.at("R_l"), "prior.R_l");
    }
    cfg.prior.dirichlet = cfg.dirichlet();
    if (j.contains("mcmc")) {
        const json& m = j.at("mcmc");
        check_keys(m, "mcmc", {"n_states", "burn_in", "walk", "seed", "histogram_bins"});
        cfg.mcmc.n_states = int_or(m, "n_states", 100000, "mcmc");
        cfg.mcmc.burn_in = int_or(m, "burn_in", 1000, "mcmc");
        if (m.contains("walk")) {
            const json& w = m.at("walk");
            if (!w.is_array() || w.size() != 2)
                throw ConfigError("config: mcmc.walk must be [w_h_t, w_R_l]");
            cfg.mcmc.walk_h_t = num(w[0], "mcmc.walk[0]");
            cfg.mcmc.walk_R_l = num(w[1], "mcmc.walk[1]");
        }
        cfg.mcmc.seed = seed_or(m, "seed", 1, "mcmc");
        cfg.mcmc.histogram_bins = int_or(m, "histogram_bins", 50, "mcmc");
        if (cfg.mcmc.n_states < 1) throw ConfigError("config: mcmc.n_states must be >= 1");
        if (cfg.mcmc.burn_in < 0 || cfg.mcmc.burn_in >= cfg.mcmc.n_states)
            throw ConfigError("config: mcmc.burn_in must lie inside the chain");
    }
    if (j.contains("aem")) {
        const json& a = j.at("aem");
        check_keys(a, "aem", {"enabled", "n_samples", "seed", "h_l_scale", "prior"});
        cfg.aem.enabled = bool_or(a, "enabled", true, "aem");
        cfg.aem.n_samples = int_or(a, "n_samples", 1000, "aem");
        cfg.aem.seed = seed_or(a, "seed", 2, "aem");
        cfg.aem.priors.h_l_scale = num_or(a, "h_l_scale", 4.0, "aem");
        if (a.contains("prior")) {
            const json& p = a.at("prior");
            check_keys(p, "aem.prior", {"h_t", "R_l"});
            auto parse_g = [&](const char* key, GaussianPrior& g) {
                if (!p.contains(key)) return;
                const json& e = p.at(key);
                check_keys(e, std::string("aem.prior.") + key, {"mean", "std"});
                g.mean = num(e.at("mean"), "aem.prior.mean");
                g.std = num(e.at("std"), "aem.prior.std");
            };
            parse_g("h_t", cfg.aem.priors.h_t);
            parse_g("R_l", cfg.aem.priors.R_l);
        }
        if (cfg.aem.n_samples < 2) throw ConfigError("config: aem.n_samples must be >= 2");
    }

    // Cross checks: layer laws must be valid over the schedule range.
    const double T_lo = std::min(cfg.initial_temperature_C, cfg.schedule.min_temperature());
    const double T_hi = std::max(cfg.initial_temperature_C, cfg.schedule.max_temperature());
    cfg.wood_fiber.validate(T_lo, T_hi, cfg.scales.T0, "layers.wood_fiber");
    cfg.insulator.validate(T_lo, T_hi, cfg.scales.T0, "layers.insulator");
    cfg.aluminum.validate(T_lo, T_hi, cfg.scales.T0, "layers.aluminum");
    return cfg;
}

ParamsFile load_params_file(const std::filesystem::path& path) {
    const json j = parse_file(path);
    check_keys(j, "<params>", {"h_t", "R_l", "h_l"});
    ParamsFile p;
    if (j.contains("h_t")) {
        if (j.at("h_t").is_string() && j.at("h_t").get<std::string>() == "inf")
            p.h_t = std::numeric_limits<double>::infinity();
        else
            p.h_t = num(j.at("h_t"), "params.h_t");
    }
    p.R_l = num_or(j, "R_l", 0.5, "<params>");
    if (j.contains("h_l")) p.h_l = num(j.at("h_l"), "params.h_l");
    return p;
}

std::string default_config_json() {
    return R"({
  "geometry": {
    "L0x_m": 0.16,
    "L0y_m": 0.08,
    "L0z_m": 0.08,
    "interface_x_m": 0.08,
    "aluminum_thickness_m": 1e-4
  },
  "layers": {
    "wood_fiber": {"k0": 8.5e-3, "k1": 3.17e-2, "c0": -2.77e5, "c1": 4.7e5},
    "insulator": {"k0": 4e-3, "k1": 0.0, "c0": 7e4, "c1": 0.0},
    "aluminum": {"k0": 240.0, "k1": 0.0, "c0": 2.37e6, "c1": 0.0}
  },
  "scales": {"T0_C": 20.0, "t0_s": 72000.0},
  "schedule": [[0.0, 20.0], [18000.0, 30.0], [54000.0, 30.0], [72000.0, 20.0]],
  "initial_temperature_C": 20.0,
  "mode": "robin",
  "sensors": [
    {"id": "x1", "x_m": 0.0},
    {"id": "x2", "x_m": 0.04}
  ],
  "observation": {"dt_s": 60.0, "sigma_s_C": 0.3, "position_uncertainty_m": 0.005, "n_repeats": 3},
  "apriori": {"h_t": 8.0, "R_l": 0.5},
  "solver1d": {"n_nodes": 101, "abs_tol": 1e-3, "rel_tol": 1e-3, "max_step": 0.05},
  "solver2d": {"dt_s": 0.5, "resolution_m": 2e-3, "tape_cells": 3, "snapshot_dt_s": 3600.0, "diagnostics_dt_s": 300.0},
  "diagnostics": {"flux_x_lo_m": 0.0, "flux_x_hi_m": 0.048},
  "prior": {
    "h_t": {"family": "uniform", "lo": 1.0, "hi": 40.0},
    "R_l": {"family": "uniform", "lo": 0.01, "hi": 1.0}
  },
  "mcmc": {"n_states": 100000, "burn_in": 1000, "walk": [5e-4, 5e-4], "seed": 1, "histogram_bins": 50},
  "aem": {
    "enabled": true,
    "n_samples": 1000,
    "seed": 2,
    "h_l_scale": 4.0,
    "prior": {"h_t": {"mean": 8.0, "std": 2.5}, "R_l": {"mean": 0.5, "std": 0.2}}
  }
}
)";
}

}  // namespace therminv
