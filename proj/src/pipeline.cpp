#include "therminv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "therminv/errors.hpp"
#include "therminv/sensitivity.hpp"

namespace therminv::pipeline {

DimensionlessConfig dimensionless(const RunConfig& cfg, double h_t, double R_l) {
    return nondimensionalize(cfg.wood_fiber, cfg.insulator, cfg.geometry, cfg.scales,
                             std::isinf(h_t) ? 0.0 : h_t, R_l, cfg.schedule,
                             cfg.initial_temperature_C);
}

PhysicalContext physical_context(const RunConfig& cfg) {
    return {cfg.wood_fiber.k0, cfg.geometry.L0x};
}

ParameterPoint parameter_point(const RunConfig& cfg, double h_t, double R_l) {
    return parameters_to_dimensionless(h_t, R_l, physical_context(cfg));
}

Mesh1D mesh1d(const RunConfig& cfg) {
    return Mesh1D::uniform(cfg.n_nodes, cfg.geometry.interface_x() / cfg.geometry.L0x);
}

Mesh2D mesh2d(const RunConfig& cfg) {
    return Mesh2D::build(cfg.geometry, cfg.solver2d.resolution_m, cfg.solver2d.tape_cells);
}

std::vector<double> observation_times(const RunConfig& cfg) {
    std::vector<double> t;
    const double dt = cfg.observation.dt_s;
    for (double v = 0.0; v < cfg.scales.t0 + 0.5 * dt; v += dt)
        t.push_back(std::min(v, cfg.scales.t0));
    if (t.back() < cfg.scales.t0) t.push_back(cfg.scales.t0);
    return t;
}

std::vector<double> observation_taus(const RunConfig& cfg) {
    auto t = observation_times(cfg);
    for (double& v : t) v /= cfg.scales.t0;
    return t;
}

std::vector<double> sensor_chis(const RunConfig& cfg) {
    std::vector<double> chi;
    for (const auto& s : cfg.sensors) chi.push_back(s.x_m / cfg.geometry.L0x);
    return chi;
}

std::vector<std::vector<double>> lumped_sensor_series(const RunConfig& cfg, double h_t,
                                                      double R_l) {
    const auto dcfg = dimensionless(cfg, h_t, R_l);
    ParameterPoint p{std::isinf(h_t) ? h_t : dcfg.bi_t, dcfg.bi_l};
    const auto taus = observation_taus(cfg);
    const Field1D field = solve_lumped(dcfg, p, mesh1d(cfg), cfg.controls, taus);
    const auto chis = sensor_chis(cfg);

    std::vector<std::vector<double>> series(chis.size(), std::vector<double>(taus.size()));
    for (std::size_t j = 0; j < chis.size(); ++j)
        for (std::size_t n = 0; n < taus.size(); ++n)
            series[j][n] = cfg.scales.T0 * field.sample_at(chis[j], taus[n]);
    return series;
}

std::vector<std::vector<double>> complete_sensor_series(const RunConfig& cfg, double h_t,
                                                        double h_l, bool strict,
                                                        std::vector<std::string>* warnings) {
    Solve2dOptions opt;
    opt.dt = cfg.solver2d.dt_s;
    opt.horizon = cfg.scales.t0;
    opt.strict = strict;
    opt.probe_times = observation_times(cfg);
    for (const auto& s : cfg.sensors)
        opt.probes.push_back({s.x_m, 0.5 * cfg.geometry.L0y});

    const auto mesh = mesh2d(cfg);
    auto result = solve_complete(cfg.wood_fiber, cfg.insulator, cfg.aluminum, cfg.geometry,
                                 cfg.schedule, std::isinf(h_t) ? 1e6 : h_t, h_l,
                                 cfg.initial_temperature_C, cfg.scales, mesh, opt);
    if (warnings) *warnings = result.warnings;

    std::vector<std::vector<double>> series;
    for (auto& ps : result.probe_series) series.push_back(std::move(ps.v));
    return series;
}

std::vector<std::vector<double>> apriori_position_uncertainty(const RunConfig& cfg) {
    const auto dcfg = dimensionless(cfg, cfg.apriori_h_t, cfg.apriori_R_l);
    ParameterPoint p{cfg.dirichlet() ? std::numeric_limits<double>::infinity() : dcfg.bi_t,
                     dcfg.bi_l};
    const auto taus = observation_taus(cfg);
    const auto times = observation_times(cfg);
    const Field1D field = solve_lumped(dcfg, p, mesh1d(cfg), cfg.controls, taus);

    std::vector<std::vector<double>> out;
    for (const auto& s : cfg.sensors)
        out.push_back(position_uncertainty(field, s.x_m / cfg.geometry.L0x,
                                           cfg.observation.position_uncertainty_m, cfg.scales,
                                           times));
    return out;
}

SensorDataset build_dataset(const RunConfig& cfg, const RepeatSet& repeats) {
    repeats.validate();
    if (repeats.sensors.size() != cfg.sensors.size())
        throw IngestError("dataset: sensor count differs from the configuration");

    SensorDataset data;
    data.sensors = repeats.sensors;
    data.times = repeats.times;
    data.values = best_estimate(repeats);
    for (const auto& s : repeats.sensors) data.chi.push_back(s.x_m / cfg.geometry.L0x);

    const auto sigma_random = random_uncertainty(repeats, cfg.observation.sample_variance);

    // Position uncertainty needs a model field; the a-priori parameters fill
    // that role before any estimate exists.
    const auto dcfg = dimensionless(cfg, cfg.apriori_h_t, cfg.apriori_R_l);
    ParameterPoint p{cfg.dirichlet() ? std::numeric_limits<double>::infinity() : dcfg.bi_t,
                     dcfg.bi_l};
    std::vector<double> taus(repeats.times.size());
    for (std::size_t n = 0; n < taus.size(); ++n) taus[n] = repeats.times[n] / cfg.scales.t0;
    for (double tau : taus)
        if (tau < 0 || tau > 1.0 + 1e-9)
            throw IngestError("dataset: observation times outside the configured horizon");
    const Field1D field = solve_lumped(dcfg, p, mesh1d(cfg), cfg.controls, taus);

    for (std::size_t j = 0; j < data.sensors.size(); ++j) {
        const auto sigma_pos = position_uncertainty(field, data.chi[j],
                                                    cfg.observation.position_uncertainty_m,
                                                    cfg.scales, repeats.times);
        data.sigma.push_back(
            total_uncertainty(cfg.observation.sigma_s_C, sigma_random[j], sigma_pos));
    }
    return data;
}

AemForwardModels aem_forward_models(const RunConfig& cfg, bool strict) {
    AemForwardModels models;
    models.lumped = [cfg](double h_t, double R_l) { return lumped_sensor_series(cfg, h_t, R_l); };
    models.complete = [cfg, strict](double h_t, double h_l) {
        return complete_sensor_series(cfg, h_t, h_l, strict);
    };
    return models;
}

int thread_cap() {
    if (const char* env = std::getenv("THERMINV_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace therminv::pipeline
