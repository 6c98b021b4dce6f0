#include "therminv/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "therminv/csv.hpp"
#include "therminv/errors.hpp"
#include "therminv/rng.hpp"

namespace therminv {

void RepeatSet::validate() const {
    if (repeats.empty()) throw IngestError("repeat set: no repeats");
    if (sensors.empty()) throw IngestError("repeat set: no sensors");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw IngestError("repeat set: times not ascending");
    for (const auto& rep : repeats) {
        if (rep.size() != sensors.size())
            throw IngestError("repeat set: sensor count mismatch between repeats");
        for (const auto& series : rep)
            if (series.size() != times.size())
                throw IngestError("repeat set: time grid mismatch between repeats");
    }
}

std::vector<std::vector<double>> best_estimate(const RepeatSet& repeats) {
    repeats.validate();
    const std::size_t ns = repeats.sensors.size(), nt = repeats.times.size();
    const double ne = static_cast<double>(repeats.n_repeats());
    std::vector<std::vector<double>> mean(ns, std::vector<double>(nt, 0.0));
    for (const auto& rep : repeats.repeats)
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t n = 0; n < nt; ++n) mean[j][n] += rep[j][n];
    for (auto& row : mean)
        for (double& v : row) v /= ne;
    return mean;
}

std::vector<std::vector<double>> random_uncertainty(const RepeatSet& repeats,
                                                    bool sample_variance,
                                                    bool* single_repeat_warning) {
    const auto mean = best_estimate(repeats);
    const std::size_t ns = repeats.sensors.size(), nt = repeats.times.size();
    const std::size_t ne = repeats.n_repeats();
    if (single_repeat_warning) *single_repeat_warning = (ne == 1);
    std::vector<std::vector<double>> sig(ns, std::vector<double>(nt, 0.0));
    if (ne == 1) return sig;

    const double var_norm = sample_variance ? 1.0 / (ne - 1.0) : 1.0 / ne;
    for (const auto& rep : repeats.repeats)
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t n = 0; n < nt; ++n) {
                const double d = rep[j][n] - mean[j][n];
                sig[j][n] += d * d;
            }
    const double outer = 1.0 / std::sqrt(static_cast<double>(ne));
    for (auto& row : sig)
        for (double& v : row) v = outer * std::sqrt(v * var_norm);
    return sig;
}

std::vector<double> position_uncertainty(const Field1D& model_field, double sensor_chi,
                                         double delta_x_m, const ReferenceScales& scales,
                                         std::span<const double> times_s) {
    if (delta_x_m < 0) throw DomainError("position_uncertainty: delta_x must be >= 0");
    const Mesh1D& mesh = model_field.mesh();
    const double h = mesh.h();
    // Central difference around the sensor, one-sided at the ends.
    const double lo = std::max(0.0, sensor_chi - h);
    const double hi = std::min(1.0, sensor_chi + h);

    std::vector<double> out(times_s.size(), 0.0);
    for (std::size_t n = 0; n < times_s.size(); ++n) {
        const double tau = times_s[n] / scales.t0;
        const double du = model_field.sample_at(hi, tau) - model_field.sample_at(lo, tau);
        const double dTdx = du / ((hi - lo) * scales.L0x) * scales.T0;  // degC per m
        out[n] = std::abs(dTdx) * delta_x_m;
    }
    return out;
}

std::vector<double> total_uncertainty(double sigma_s, std::span<const double> sigma_random,
                                      std::span<const double> sigma_position) {
    if (sigma_random.size() != sigma_position.size())
        throw DomainError("total_uncertainty: component size mismatch");
    std::vector<double> out(sigma_random.size());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = std::sqrt(sigma_s * sigma_s + sigma_random[n] * sigma_random[n] +
                           sigma_position[n] * sigma_position[n]);
    return out;
}

RepeatSet synthesize_observations(std::span<const TimeSeries> truth_per_sensor,
                                  std::span<const Sensor> sensors,
                                  std::span<const double> times_s,
                                  std::span<const std::vector<double>> sigma_per_sensor,
                                  int n_repeats, std::uint64_t seed) {
    if (truth_per_sensor.size() != sensors.size() || sigma_per_sensor.size() != sensors.size())
        throw DomainError("synthesize_observations: per-sensor inputs mismatch");
    if (n_repeats < 1) throw DomainError("synthesize_observations: need at least one repeat");
    for (const auto& sig : sigma_per_sensor)
        if (sig.size() != times_s.size())
            throw DomainError("synthesize_observations: sigma grid mismatch");

    RepeatSet rs;
    rs.sensors.assign(sensors.begin(), sensors.end());
    rs.times.assign(times_s.begin(), times_s.end());
    Rng rng(seed);
    rs.repeats.resize(n_repeats);
    for (int r = 0; r < n_repeats; ++r) {
        rs.repeats[r].resize(sensors.size());
        for (std::size_t j = 0; j < sensors.size(); ++j) {
            auto& series = rs.repeats[r][j];
            series.resize(times_s.size());
            for (std::size_t n = 0; n < times_s.size(); ++n) {
                const double truth = truth_per_sensor[j].at(times_s[n]);
                const double sig = sigma_per_sensor[j][n];
                series[n] = sig > 0 ? truth + sig * rng.gaussian() : truth;
            }
        }
    }
    rs.validate();
    return rs;
}

RepeatSet synthesize_observations(const Field1D& truth, const ReferenceScales& scales,
                                  std::span<const Sensor> sensors,
                                  std::span<const double> times_s,
                                  std::span<const std::vector<double>> sigma_per_sensor,
                                  int n_repeats, std::uint64_t seed) {
    std::vector<TimeSeries> series(sensors.size());
    for (std::size_t j = 0; j < sensors.size(); ++j) {
        const double chi = sensors[j].x_m / scales.L0x;
        if (chi < 0 || chi > 1)
            throw DomainError("synthesize_observations: sensor outside the domain");
        series[j].t.assign(times_s.begin(), times_s.end());
        series[j].v.resize(times_s.size());
        for (std::size_t n = 0; n < times_s.size(); ++n)
            series[j].v[n] = scales.T0 * truth.sample_at(chi, times_s[n] / scales.t0);
    }
    return synthesize_observations(series, sensors, times_s, sigma_per_sensor, n_repeats, seed);
}

RepeatSet read_repeats(const std::filesystem::path& manifest,
                       std::span<const std::filesystem::path> repeat_files) {
    if (repeat_files.empty()) throw IngestError("read_repeats: no repeat files given");

    const CsvTable mtab = read_csv(manifest);
    const std::size_t mid = mtab.column("sensor_id", manifest.string());
    const std::size_t mx = mtab.column("x_m", manifest.string());

    RepeatSet rs;
    std::map<std::string, std::size_t> sensor_index;
    for (const auto& row : mtab.rows) {
        sensor_index[row[mid]] = rs.sensors.size();
        rs.sensors.push_back({row[mid], parse_double(row[mx], manifest.string())});
    }
    if (rs.sensors.empty()) throw IngestError("read_repeats: empty sensor manifest");

    bool first = true;
    for (const auto& file : repeat_files) {
        const CsvTable tab = read_csv(file);
        const std::size_t ct = tab.column("t_s", file.string());
        const std::size_t cid = tab.column("sensor_id", file.string());
        const std::size_t cv = tab.column("T_C", file.string());

        std::vector<double> times;
        std::vector<std::vector<double>> series(rs.sensors.size());
        std::map<double, std::size_t> time_index;
        for (const auto& row : tab.rows) {
            const double t = parse_double(row[ct], file.string());
            const auto sit = sensor_index.find(row[cid]);
            if (sit == sensor_index.end())
                throw IngestError("read_repeats: unknown sensor '" + row[cid] + "' in " +
                                  file.string());
            auto [tit, inserted] = time_index.try_emplace(t, times.size());
            if (inserted) {
                times.push_back(t);
                for (auto& s : series) s.push_back(std::numeric_limits<double>::quiet_NaN());
            }
            series[sit->second][tit->second] = parse_double(row[cv], file.string());
        }
        for (const auto& s : series)
            for (double v : s)
                if (std::isnan(v))
                    throw IngestError("read_repeats: missing samples in " + file.string());

        if (first) {
            rs.times = times;
            first = false;
        } else if (times != rs.times) {
            throw IngestError("read_repeats: time grid of " + file.string() +
                              " differs from the first repeat (no resampling is performed)");
        }
        rs.repeats.push_back(std::move(series));
    }
    rs.validate();
    return rs;
}

void write_dataset(const SensorDataset& data, const std::filesystem::path& path) {
    CsvWriter out(path, {"t_s", "sensor_id", "T_C", "sigma_C"});
    for (std::size_t n = 0; n < data.times.size(); ++n)
        for (std::size_t j = 0; j < data.sensors.size(); ++j)
            out.row({format_double(data.times[n]), data.sensors[j].id,
                     format_double(data.values[j][n]), format_double(data.sigma[j][n])});
}

SensorDataset read_dataset(const std::filesystem::path& manifest,
                           const std::filesystem::path& dataset_csv) {
    const CsvTable mtab = read_csv(manifest);
    const std::size_t mid = mtab.column("sensor_id", manifest.string());
    const std::size_t mx = mtab.column("x_m", manifest.string());

    SensorDataset data;
    std::map<std::string, std::size_t> sensor_index;
    for (const auto& row : mtab.rows) {
        sensor_index[row[mid]] = data.sensors.size();
        data.sensors.push_back({row[mid], parse_double(row[mx], manifest.string())});
    }

    const CsvTable tab = read_csv(dataset_csv);
    const std::size_t ct = tab.column("t_s", dataset_csv.string());
    const std::size_t cid = tab.column("sensor_id", dataset_csv.string());
    const std::size_t cv = tab.column("T_C", dataset_csv.string());
    const std::size_t cs = tab.column("sigma_C", dataset_csv.string());

    std::map<double, std::size_t> time_index;
    data.values.assign(data.sensors.size(), {});
    data.sigma.assign(data.sensors.size(), {});
    for (const auto& row : tab.rows) {
        const double t = parse_double(row[ct], dataset_csv.string());
        const auto sit = sensor_index.find(row[cid]);
        if (sit == sensor_index.end())
            throw IngestError("read_dataset: unknown sensor '" + row[cid] + "'");
        auto [tit, inserted] = time_index.try_emplace(t, data.times.size());
        if (inserted) {
            data.times.push_back(t);
            for (auto& v : data.values) v.push_back(std::numeric_limits<double>::quiet_NaN());
            for (auto& v : data.sigma) v.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        data.values[sit->second][tit->second] = parse_double(row[cv], dataset_csv.string());
        const double sig = parse_double(row[cs], dataset_csv.string());
        if (!(sig > 0)) throw IngestError("read_dataset: sigma must be > 0 everywhere");
        data.sigma[sit->second][tit->second] = sig;
    }
    for (const auto& v : data.values)
        for (double x : v)
            if (std::isnan(x)) throw IngestError("read_dataset: missing samples");
    return data;
}

void write_repeat(const RepeatSet& repeats, std::size_t repeat_index,
                  const std::filesystem::path& path) {
    CsvWriter out(path, {"t_s", "sensor_id", "T_C"});
    const auto& rep = repeats.repeats.at(repeat_index);
    for (std::size_t n = 0; n < repeats.times.size(); ++n)
        for (std::size_t j = 0; j < repeats.sensors.size(); ++j)
            out.row({format_double(repeats.times[n]), repeats.sensors[j].id,
                     format_double(rep[j][n])});
}

}  // namespace therminv
