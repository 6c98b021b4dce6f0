#include "therminv/aem.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "therminv/csv.hpp"
#include "therminv/errors.hpp"
#include "therminv/rng.hpp"

namespace therminv {

std::string AemPriors::describe() const {
    return "h_t ~ N(" + format_double(h_t.mean) + ", " + format_double(h_t.std) +
           "), R_l ~ N(" + format_double(R_l.mean) + ", " + format_double(R_l.std) +
           "), h_l = " + format_double(h_l_scale) + " * R_l";
}

AemModel build_aem(const AemForwardModels& models, const AemPriors& priors, int n_samples,
                   std::span<const std::string> sensor_ids, std::span<const double> times_s,
                   std::uint64_t seed, int n_threads) {
    if (n_samples < 2) throw ConfigError("build_aem: need at least 2 samples");
    if (sensor_ids.empty() || times_s.empty())
        throw ConfigError("build_aem: sensors and times must be non-empty");
    if (!(priors.h_t.std >= 0 && priors.R_l.std >= 0))
        throw ConfigError("build_aem: prior stds must be >= 0");

    const std::size_t ns = sensor_ids.size(), nt = times_s.size();

    // All draws come from one stream up front; worker threads only evaluate.
    Rng rng(seed);
    std::vector<std::pair<double, double>> draws(n_samples);
    for (auto& [h_t, R_l] : draws) {
        h_t = priors.h_t.mean + priors.h_t.std * rng.gaussian();
        R_l = priors.R_l.mean + priors.R_l.std * rng.gaussian();
    }

    std::vector<std::vector<std::vector<double>>> errors(n_samples);
    std::vector<char> failed(n_samples, 0);
    std::atomic<int> next{0};

    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_samples) return;
            const auto [h_t, R_l] = draws[k];
            try {
                auto lump = models.lumped(h_t, R_l);
                auto comp = models.complete(h_t, priors.h_l_scale * R_l);
                if (lump.size() != ns || comp.size() != ns)
                    throw DomainError("build_aem: sensor count mismatch from forward model");
                std::vector<std::vector<double>> err(ns, std::vector<double>(nt));
                for (std::size_t j = 0; j < ns; ++j) {
                    if (lump[j].size() != nt || comp[j].size() != nt)
                        throw DomainError("build_aem: grid mismatch from forward model");
                    for (std::size_t n = 0; n < nt; ++n) err[j][n] = lump[j][n] - comp[j][n];
                }
                errors[k] = std::move(err);
            } catch (const std::exception&) {
                failed[k] = 1;
            }
        }
    };

    const int nw = std::max(1, n_threads);
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    int n_ok = 0;
    for (int k = 0; k < n_samples; ++k)
        if (!failed[k]) ++n_ok;
    if (n_ok < n_samples - n_samples / 10 || n_ok < 2)
        throw SolverError("build_aem: more than 10% of forward solves failed (" +
                              std::to_string(n_samples - n_ok) + "/" + std::to_string(n_samples) + ")",
                          0.0);

    AemModel model;
    model.sensor_ids.assign(sensor_ids.begin(), sensor_ids.end());
    model.times.assign(times_s.begin(), times_s.end());
    model.e.assign(ns, std::vector<double>(nt, 0.0));
    model.s_e.assign(ns, std::vector<double>(nt, 0.0));
    model.n_samples = n_samples;
    model.n_skipped = n_samples - n_ok;
    model.prior_descriptor = priors.describe();
    model.seed = seed;

    for (int k = 0; k < n_samples; ++k) {
        if (failed[k]) continue;
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t n = 0; n < nt; ++n) model.e[j][n] += errors[k][j][n];
    }
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t n = 0; n < nt; ++n) model.e[j][n] /= n_ok;

    if (n_ok > 1) {
        for (int k = 0; k < n_samples; ++k) {
            if (failed[k]) continue;
            for (std::size_t j = 0; j < ns; ++j)
                for (std::size_t n = 0; n < nt; ++n) {
                    const double d = errors[k][j][n] - model.e[j][n];
                    model.s_e[j][n] += d * d;
                }
        }
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t n = 0; n < nt; ++n)
                model.s_e[j][n] = std::sqrt(model.s_e[j][n] / (n_ok - 1));
    }
    return model;
}

std::pair<std::vector<double>, std::vector<double>> apply_aem(
    std::span<const double> residual_C, std::span<const double> sigma_C,
    const AemModel& model, std::size_t sensor_index) {
    if (sensor_index >= model.sensor_ids.size())
        throw DomainError("apply_aem: sensor index out of range");
    if (residual_C.size() != model.times.size() || sigma_C.size() != model.times.size())
        throw DomainError("apply_aem: grid mismatch with the error model");
    std::vector<double> corrected(residual_C.size()), inflated(residual_C.size());
    for (std::size_t n = 0; n < residual_C.size(); ++n) {
        corrected[n] = residual_C[n] - model.e[sensor_index][n];
        const double se = model.s_e[sensor_index][n];
        inflated[n] = std::sqrt(sigma_C[n] * sigma_C[n] + se * se);
    }
    return {std::move(corrected), std::move(inflated)};
}

void save_aem(const AemModel& model, const std::filesystem::path& csv_path,
              const std::filesystem::path& json_path) {
    CsvWriter out(csv_path, {"sensor_id", "t_s", "e_C", "s_e_C"});
    for (std::size_t n = 0; n < model.times.size(); ++n)
        for (std::size_t j = 0; j < model.sensor_ids.size(); ++j)
            out.row({model.sensor_ids[j], format_double(model.times[n]),
                     format_double(model.e[j][n]), format_double(model.s_e[j][n])});

    nlohmann::json meta;
    meta["prior"] = model.prior_descriptor;
    meta["seed"] = model.seed;
    meta["n_samples"] = model.n_samples;
    meta["n_skipped"] = model.n_skipped;
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw ConfigError("cannot open " + json_path.string());
    js << meta.dump(2) << "\n";
}

AemModel load_aem(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    const CsvTable tab = read_csv(csv_path);
    const std::size_t cid = tab.column("sensor_id", csv_path.string());
    const std::size_t ct = tab.column("t_s", csv_path.string());
    const std::size_t ce = tab.column("e_C", csv_path.string());
    const std::size_t cs = tab.column("s_e_C", csv_path.string());

    AemModel model;
    std::map<std::string, std::size_t> sensor_index;
    std::map<double, std::size_t> time_index;
    for (const auto& row : tab.rows) {
        sensor_index.try_emplace(row[cid], sensor_index.size());
        time_index.try_emplace(parse_double(row[ct], csv_path.string()), 0);
    }
    model.sensor_ids.resize(sensor_index.size());
    for (const auto& [id, j] : sensor_index) model.sensor_ids[j] = id;
    std::size_t n = 0;
    for (auto& [t, idx] : time_index) {
        idx = n++;
        model.times.push_back(t);
    }
    model.e.assign(model.sensor_ids.size(), std::vector<double>(model.times.size(), 0.0));
    model.s_e = model.e;
    for (const auto& row : tab.rows) {
        const std::size_t j = sensor_index.at(row[cid]);
        const std::size_t k = time_index.at(parse_double(row[ct], csv_path.string()));
        model.e[j][k] = parse_double(row[ce], csv_path.string());
        model.s_e[j][k] = parse_double(row[cs], csv_path.string());
    }

    std::ifstream js(json_path, std::ios::binary);
    if (js) {
        nlohmann::json meta = nlohmann::json::parse(js, nullptr, true, true);
        model.prior_descriptor = meta.value("prior", "");
        model.seed = meta.value("seed", std::uint64_t{0});
        model.n_samples = meta.value("n_samples", 0);
        model.n_skipped = meta.value("n_skipped", 0);
    }
    return model;
}

}  // namespace therminv
