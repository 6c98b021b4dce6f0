#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "therminv/csv.hpp"
#include "therminv/errors.hpp"
#include "therminv/pipeline.hpp"
#include "therminv/sensitivity.hpp"

namespace therminv::commands {

namespace {

using nlohmann::json;
using namespace therminv::pipeline;

constexpr const char* kToolVersion = "0.1.0";

json meta_block() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return json{{"generated_at", buf}, {"tool", "therminv"}, {"version", kToolVersion}};
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file " + path.string());
    out << j.dump(2) << "\n";
}

void ensure_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string());
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "numerical failure: " << e.what() << " (t = " << e.time << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
}

struct ResolvedParams {
    double h_t, R_l, h_l;
};

ResolvedParams resolve_params(const RunConfig& cfg, const std::filesystem::path& params_file) {
    ResolvedParams p{cfg.apriori_h_t, cfg.apriori_R_l, 0.0};
    if (!params_file.empty()) {
        const ParamsFile file = load_params_file(params_file);
        p.h_t = file.h_t;
        p.R_l = file.R_l;
        p.h_l = file.h_l.value_or(cfg.aem.priors.h_l_scale * file.R_l);
    } else {
        p.h_l = cfg.aem.priors.h_l_scale * p.R_l;
    }
    if (cfg.dirichlet()) p.h_t = std::numeric_limits<double>::infinity();
    return p;
}

Solve2dResult run_complete_full(const RunConfig& cfg, double h_t, double h_l, bool strict,
                                double frame_dt) {
    Solve2dOptions opt;
    opt.dt = cfg.solver2d.dt_s;
    opt.horizon = cfg.scales.t0;
    opt.strict = strict;
    for (double t = 0.0; t <= cfg.scales.t0 + 1e-9; t += frame_dt)
        opt.snapshot_times.push_back(std::min(t, cfg.scales.t0));
    opt.probe_times = observation_times(cfg);
    for (const auto& s : cfg.sensors) opt.probes.push_back({s.x_m, 0.5 * cfg.geometry.L0y});
    const auto mesh = mesh2d(cfg);
    return solve_complete(cfg.wood_fiber, cfg.insulator, cfg.aluminum, cfg.geometry,
                          cfg.schedule, std::isinf(h_t) ? 1e6 : h_t, h_l,
                          cfg.initial_temperature_C, cfg.scales, mesh, opt);
}

void write_lumped_field(const Field1D& field, const std::filesystem::path& path) {
    CsvWriter out(path, {"tau", "chi", "u"});
    for (std::size_t k = 0; k < field.times().size(); ++k)
        for (int i = 0; i < field.n_nodes(); ++i)
            out.row({format_double(field.times()[k]), format_double(field.mesh().chi(i)),
                     format_double(field.value(i, k))});
}

void warn_all(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int simulate(const CommonArgs& args, const std::string& model,
             const std::filesystem::path& params_file) {
    return run_guarded([&] {
        const RunConfig cfg = load_run_config(args.config);
        ensure_out_dir(args.out_dir);
        const ResolvedParams p = resolve_params(cfg, params_file);

        if (model == "lumped") {
            const auto dcfg = dimensionless(cfg, p.h_t, p.R_l);
            ParameterPoint pp{cfg.dirichlet() ? p.h_t : dcfg.bi_t, dcfg.bi_l};
            const auto taus = observation_taus(cfg);
            const Field1D field = solve_lumped(dcfg, pp, mesh1d(cfg), cfg.controls, taus);
            write_lumped_field(field, args.out_dir / "field_lumped.csv");
        } else if (model == "complete") {
            auto result = run_complete_full(cfg, p.h_t, p.h_l, args.strict,
                                            cfg.solver2d.diagnostics_dt_s);
            warn_all(result.warnings);

            // Full frames only at the coarse snapshot cadence.
            {
                CsvWriter out(args.out_dir / "field_2d.csv", {"t_s", "x_m", "y_m", "T_C"});
                const auto& m = result.field.mesh;
                for (std::size_t k = 0; k < result.field.times.size(); ++k) {
                    const double t = result.field.times[k];
                    if (std::fmod(t, cfg.solver2d.snapshot_dt_s) > 1e-9) continue;
                    for (int i = 0; i < m.nx; ++i)
                        for (int j = 0; j < m.ny; ++j)
                            out.row({format_double(t), format_double(m.x_centers[i]),
                                     format_double(m.y_centers[j]),
                                     format_double(result.field.at(k, i, j))});
                }
            }
            {
                const auto fr = flux_ratio(result.field, cfg.diagnostics.flux_x_lo_m,
                                           cfg.diagnostics.flux_x_hi_m, 0.5 * cfg.geometry.L0y,
                                           cfg.wood_fiber, cfg.scales);
                const auto jf = interface_flux(result.field, cfg.geometry, cfg.wood_fiber,
                                               cfg.insulator, cfg.aluminum, cfg.scales);
                const auto ad = aluminum_deviation(result.field, cfg.schedule);
                CsvWriter out(args.out_dir / "diagnostics_2d.csv",
                              {"t_s", "flux_ratio", "interface_flux_Wm2", "alu_deviation_C"});
                for (std::size_t k = 0; k < fr.t.size(); ++k)
                    out.row({format_double(fr.t[k]), format_double(fr.v[k]),
                             format_double(jf.v[k]), format_double(ad.v[k])});
            }
            {
                CsvWriter out(args.out_dir / "sensors_2d.csv", {"t_s", "sensor_id", "T_C"});
                for (std::size_t n = 0; n < result.probe_series[0].t.size(); ++n)
                    for (std::size_t j = 0; j < cfg.sensors.size(); ++j)
                        out.row({format_double(result.probe_series[j].t[n]),
                                 cfg.sensors[j].id,
                                 format_double(result.probe_series[j].v[n])});
            }
        } else {
            throw ConfigError("simulate: --model must be 'lumped' or 'complete'");
        }
    });
}

int sensitivity(const CommonArgs& args) {
    return run_guarded([&] {
        const RunConfig cfg = load_run_config(args.config);
        ensure_out_dir(args.out_dir);

        const auto dcfg = dimensionless(cfg, cfg.apriori_h_t, cfg.apriori_R_l);
        ParameterPoint p{cfg.dirichlet() ? std::numeric_limits<double>::infinity() : dcfg.bi_t,
                         dcfg.bi_l};
        const auto taus = observation_taus(cfg);
        const auto times = observation_times(cfg);
        const auto mesh = mesh1d(cfg);
        auto [u, sens] = solve_sensitivities(dcfg, p, mesh, cfg.controls, taus);

        {
            CsvWriter out(args.out_dir / "sensitivity.csv",
                          {"tau", "chi", "theta", "psi", "phi"});
            for (std::size_t k = 0; k < taus.size(); ++k)
                for (int i = 0; i < mesh.n_nodes; ++i)
                    out.row({format_double(taus[k]), format_double(mesh.chi(i)),
                             format_double(sens.theta.value(i, k)),
                             format_double(sens.psi.value(i, k)),
                             format_double(sens.phi.value(i, k))});
        }

        // Pre-estimation sigma: sensor noise + position part (no repeats yet).
        const auto chis = sensor_chis(cfg);
        const auto sigma_pos = apriori_position_uncertainty(cfg);
        std::vector<TimeSeries> sigma(chis.size());
        for (std::size_t j = 0; j < chis.size(); ++j) {
            sigma[j].t = times;
            sigma[j].v.resize(times.size());
            for (std::size_t n = 0; n < times.size(); ++n)
                sigma[j].v[n] = std::sqrt(cfg.observation.sigma_s_C * cfg.observation.sigma_s_C +
                                          sigma_pos[j][n] * sigma_pos[j][n]);
        }
        const FisherMatrix fisher = fisher_matrix(sens, chis, sigma, cfg.scales);
        const auto [eta_t, eta_l] = error_indicators(fisher);
        json report{{"meta", meta_block()}, {"f11", fisher.f11}, {"f12", fisher.f12},
                    {"f22", fisher.f22},    {"eta_t", eta_t},    {"eta_l", eta_l}};
        write_json(report, args.out_dir / "fisher.json");

        // Correlation table over the stacked sensor series.
        {
            auto stack = [&](const Field1D& f, std::size_t j) {
                std::vector<double> v(taus.size());
                for (std::size_t k = 0; k < taus.size(); ++k) v[k] = f.sample_at(chis[j], taus[k]);
                return v;
            };
            auto concat = [](std::vector<double> a, const std::vector<double>& b) {
                a.insert(a.end(), b.begin(), b.end());
                return a;
            };
            CsvWriter out(args.out_dir / "correlation.csv", {"pair", "sensors", "corr"});
            for (std::size_t j = 0; j < chis.size(); ++j)
                out.row({"theta-psi", cfg.sensors[j].id,
                         format_double(correlation(stack(sens.theta, j), stack(sens.psi, j)))});
            if (chis.size() >= 2) {
                const auto th = concat(stack(sens.theta, 0), stack(sens.theta, 1));
                const auto ps = concat(stack(sens.psi, 0), stack(sens.psi, 1));
                const auto ph = concat(stack(sens.phi, 0), stack(sens.phi, 1));
                out.row({"theta-psi", "all", format_double(correlation(th, ps))});
                out.row({"theta-phi", "all", format_double(correlation(th, ph))});
                out.row({"psi-phi", "all", format_double(correlation(ps, ph))});
            }
        }
    });
}

int aem(const CommonArgs& args, std::uint64_t seed, bool seed_given) {
    return run_guarded([&] {
        const RunConfig cfg = load_run_config(args.config);
        ensure_out_dir(args.out_dir);
        const std::uint64_t use_seed = seed_given ? seed : cfg.aem.seed;

        std::vector<std::string> ids;
        for (const auto& s : cfg.sensors) ids.push_back(s.id);
        const auto times = observation_times(cfg);
        const AemModel model =
            build_aem(aem_forward_models(cfg, args.strict), cfg.aem.priors, cfg.aem.n_samples,
                      ids, times, use_seed, thread_cap());
        save_aem(model, args.out_dir / "aem.csv", args.out_dir / "aem_meta.json");
        if (model.n_skipped > 0)
            std::cerr << "warning: " << model.n_skipped << " AEM samples skipped\n";
    });
}

int synth(const CommonArgs& args, const std::filesystem::path& params_file, std::uint64_t seed,
          bool seed_given) {
    return run_guarded([&] {
        const RunConfig cfg = load_run_config(args.config);
        if (!seed_given) throw ConfigError("synth: an explicit --seed is required");
        ensure_out_dir(args.out_dir);
        const ResolvedParams p = resolve_params(cfg, params_file);

        std::vector<std::string> warnings;
        const auto truth = complete_sensor_series(cfg, p.h_t, p.h_l, args.strict, &warnings);
        warn_all(warnings);
        const auto times = observation_times(cfg);

        std::vector<TimeSeries> truth_series(cfg.sensors.size());
        std::vector<std::vector<double>> sigma(cfg.sensors.size(),
                                               std::vector<double>(times.size(),
                                                                   cfg.observation.sigma_s_C));
        for (std::size_t j = 0; j < cfg.sensors.size(); ++j) {
            truth_series[j].t = times;
            truth_series[j].v = truth[j];
        }
        const RepeatSet repeats =
            synthesize_observations(truth_series, cfg.sensors, times, sigma,
                                    cfg.observation.n_repeats, seed);

        {
            CsvWriter out(args.out_dir / "sensors.csv", {"sensor_id", "x_m"});
            for (const auto& s : cfg.sensors) out.row({s.id, format_double(s.x_m)});
        }
        {
            CsvWriter out(args.out_dir / "truth.csv", {"t_s", "sensor_id", "T_C"});
            for (std::size_t n = 0; n < times.size(); ++n)
                for (std::size_t j = 0; j < cfg.sensors.size(); ++j)
                    out.row({format_double(times[n]), cfg.sensors[j].id,
                             format_double(truth[j][n])});
        }
        for (std::size_t r = 0; r < repeats.n_repeats(); ++r)
            write_repeat(repeats, r, args.out_dir / ("repeat_" + std::to_string(r + 1) + ".csv"));
    });
}

int estimate(const CommonArgs& args, const std::filesystem::path& data_dir,
             const std::filesystem::path& aem_file, std::uint64_t seed, bool seed_given) {
    return run_guarded([&] {
        const RunConfig cfg = load_run_config(args.config);
        ensure_out_dir(args.out_dir);

        // Ingest repeats: manifest + repeat_*.csv in lexical order.
        std::vector<std::filesystem::path> repeat_files;
        for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
            const auto name = entry.path().filename().string();
            if (name.rfind("repeat_", 0) == 0 && entry.path().extension() == ".csv")
                repeat_files.push_back(entry.path());
        }
        std::sort(repeat_files.begin(), repeat_files.end());
        if (repeat_files.empty())
            throw IngestError("estimate: no repeat_*.csv files in " + data_dir.string());
        const RepeatSet repeats = read_repeats(data_dir / "sensors.csv", repeat_files);
        const SensorDataset data = build_dataset(cfg, repeats);
        write_dataset(data, args.out_dir / "dataset.csv");

        AemModel aem_model;
        const AemModel* aem_ptr = nullptr;
        if (!aem_file.empty()) {
            auto sidecar = aem_file;
            sidecar.replace_extension(".json");
            if (sidecar == aem_file) sidecar += ".json";
            aem_model = load_aem(aem_file, std::filesystem::exists(sidecar)
                                               ? sidecar
                                               : aem_file.parent_path() / "aem_meta.json");
            if (aem_model.times != data.times)
                throw IngestError("estimate: AEM grid does not match the observation grid");
            aem_ptr = &aem_model;
        }

        const auto dcfg = dimensionless(cfg, cfg.apriori_h_t, cfg.apriori_R_l);
        const auto mesh = mesh1d(cfg);
        const auto log_post = make_log_posterior(data, dcfg, mesh, cfg.controls, aem_ptr,
                                                 cfg.prior, physical_context(cfg));

        McmcSettings settings;
        settings.n_states = cfg.mcmc.n_states;
        settings.burn_in = cfg.mcmc.burn_in;
        settings.walk_h_t = cfg.mcmc.walk_h_t;
        settings.walk_R_l = cfg.mcmc.walk_R_l;
        settings.seed = seed_given ? seed : cfg.mcmc.seed;

        const Chain chain = run_mcmc(log_post, cfg.prior, settings);
        write_chain(chain, args.out_dir / "chain.csv");
        const ChainStats stats = chain_stats(chain, settings.burn_in, cfg.prior,
                                             cfg.mcmc.histogram_bins);

        // Post-fit residuals at the posterior mean.
        const double h_hat = stats.h_t ? stats.h_t->mean
                                       : std::numeric_limits<double>::infinity();
        const double r_hat = stats.R_l.mean;
        const auto model_series = lumped_sensor_series(cfg, h_hat, r_hat);
        {
            CsvWriter out(args.out_dir / "residuals.csv",
                          {"t_s", "sensor_id", "T_obs_C", "T_model_C", "residual_C", "sigma_C",
                           "e_C", "residual_corrected_C", "sigma_tilde_C"});
            for (std::size_t n = 0; n < data.times.size(); ++n) {
                for (std::size_t j = 0; j < data.sensors.size(); ++j) {
                    const double res = data.values[j][n] - model_series[j][n];
                    double e = 0.0, st = data.sigma[j][n];
                    if (aem_ptr) {
                        e = aem_model.e[j][n];
                        st = std::sqrt(st * st + aem_model.s_e[j][n] * aem_model.s_e[j][n]);
                    }
                    out.row({format_double(data.times[n]), data.sensors[j].id,
                             format_double(data.values[j][n]), format_double(model_series[j][n]),
                             format_double(res), format_double(data.sigma[j][n]),
                             format_double(e), format_double(res - e), format_double(st)});
                }
            }
        }

        auto summarize = [](const ParameterSummary& s) {
            json h{{"lo", s.histogram.lo}, {"hi", s.histogram.hi}, {"counts", s.histogram.counts}};
            return json{{"mean", s.mean}, {"std", s.std}, {"boundary_pinned", s.boundary_pinned},
                        {"histogram", h}};
        };
        json prior_desc{
            {"h_t",
             {{"family", cfg.prior.h_t.family == PriorFamily::uniform ? "uniform" : "gaussian"},
              {"lo", cfg.prior.h_t.lo},
              {"hi", cfg.prior.h_t.hi}}},
            {"R_l",
             {{"family", cfg.prior.R_l.family == PriorFamily::uniform ? "uniform" : "gaussian"},
              {"lo", cfg.prior.R_l.lo},
              {"hi", cfg.prior.R_l.hi}}}};
        json summary{{"meta", meta_block()},
                     {"mode", cfg.dirichlet() ? "dirichlet-top" : "robin"},
                     {"h_t", stats.h_t ? summarize(*stats.h_t) : json(nullptr)},
                     {"R_l", summarize(stats.R_l)},
                     {"acceptance_rate", stats.acceptance_rate},
                     {"n_states", stats.n_states},
                     {"burn_in", stats.burn_in},
                     {"seed", settings.seed},
                     {"walk", {settings.walk_h_t, settings.walk_R_l}},
                     {"aem", aem_ptr != nullptr},
                     {"prior", prior_desc}};
        std::vector<std::string> pinned;
        if (stats.h_t && stats.h_t->boundary_pinned) pinned.push_back("h_t");
        if (stats.R_l.boundary_pinned) pinned.push_back("R_l");
        summary["boundary_pinned"] = pinned;
        if (!pinned.empty())
            std::cerr << "warning: posterior mass piles up on a prior bound for:";
        for (const auto& name : pinned) std::cerr << " " << name;
        if (!pinned.empty()) std::cerr << "\n";
        write_json(summary, args.out_dir / "summary.json");
    });
}

int validate(const CommonArgs& args, const std::filesystem::path& params_file) {
    return run_guarded([&] {
        const RunConfig cfg = load_run_config(args.config);
        ensure_out_dir(args.out_dir);
        const ResolvedParams p = resolve_params(cfg, params_file);
        const auto times = observation_times(cfg);

        using clock = std::chrono::steady_clock;

        const auto t2a = clock::now();
        auto result = run_complete_full(cfg, p.h_t, p.h_l, args.strict,
                                        cfg.solver2d.diagnostics_dt_s);
        const auto t2b = clock::now();
        warn_all(result.warnings);

        const auto t1a = clock::now();
        const auto lumped = lumped_sensor_series(cfg, p.h_t, p.R_l);
        const auto t1b = clock::now();

        const double wall_2d = std::chrono::duration<double>(t2b - t2a).count();
        const double wall_1d = std::chrono::duration<double>(t1b - t1a).count();

        std::vector<double> max_abs(cfg.sensors.size(), 0.0);
        {
            CsvWriter out(args.out_dir / "residuals_1d_vs_2d.csv",
                          {"t_s", "sensor_id", "T_1d_C", "T_2d_C", "delta_C"});
            for (std::size_t n = 0; n < times.size(); ++n) {
                for (std::size_t j = 0; j < cfg.sensors.size(); ++j) {
                    const double a = lumped[j][n];
                    const double b = result.probe_series[j].v[n];
                    out.row({format_double(times[n]), cfg.sensors[j].id, format_double(a),
                             format_double(b), format_double(a - b)});
                    max_abs[j] = std::max(max_abs[j], std::abs(a - b));
                }
            }
        }

        const auto fr = flux_ratio(result.field, cfg.diagnostics.flux_x_lo_m,
                                   cfg.diagnostics.flux_x_hi_m, 0.5 * cfg.geometry.L0y,
                                   cfg.wood_fiber, cfg.scales);
        const auto jf = interface_flux(result.field, cfg.geometry, cfg.wood_fiber, cfg.insulator,
                                       cfg.aluminum, cfg.scales);
        const auto ad = aluminum_deviation(result.field, cfg.schedule);
        double fr_min = 1.0, jf_peak = 0.0, ad_peak = 0.0;
        for (std::size_t k = 1; k < fr.t.size(); ++k) {
            fr_min = std::min(fr_min, fr.v[k]);
            jf_peak = std::max(jf_peak, std::abs(jf.v[k]));
            ad_peak = std::max(ad_peak, std::abs(ad.v[k]));
        }

        json sensors_json = json::object();
        for (std::size_t j = 0; j < cfg.sensors.size(); ++j)
            sensors_json[cfg.sensors[j].id] = max_abs[j];

        json report{{"meta", meta_block()},
                    {"params", {{"h_t", std::isinf(p.h_t) ? json("inf") : json(p.h_t)},
                                {"R_l", p.R_l},
                                {"h_l", p.h_l}}},
                    {"max_abs_residual_C", sensors_json},
                    {"flux_ratio_min", fr_min},
                    {"interface_flux_peak_Wm2", jf_peak},
                    {"alu_deviation_peak_C", ad_peak},
                    {"timing", {{"wall_2d_s", wall_2d},
                                {"wall_1d_s", wall_1d},
                                {"ratio_2d_over_1d", wall_2d / std::max(wall_1d, 1e-9)}}},
                    {"warnings", result.warnings}};
        write_json(report, args.out_dir / "report.json");
    });
}

}  // namespace therminv::commands
