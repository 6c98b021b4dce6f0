#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "therminv/field1d.hpp"
#include "therminv/material.hpp"
#include "therminv/timeseries.hpp"

namespace therminv {

struct Sensor {
    std::string id;
    double x_m = 0;
};

/// Repeated experimental campaigns on one shared time grid.
struct RepeatSet {
    std::vector<Sensor> sensors;
    std::vector<double> times;                        // s
    std::vector<std::vector<std::vector<double>>> repeats;  // [repeat][sensor][time], degC
    std::string fan_tag;  // free-form configuration label (% of v_max)

    std::size_t n_repeats() const { return repeats.size(); }
    void validate() const;
};

/// Best estimates plus per-sample standard deviations, ready for the
/// likelihood.
struct SensorDataset {
    std::vector<Sensor> sensors;
    std::vector<double> chi;            // dimensionless positions
    std::vector<double> times;          // s
    std::vector<std::vector<double>> values;  // [sensor][time], degC
    std::vector<std::vector<double>> sigma;   // [sensor][time], degC, > 0
};

/// Arithmetic mean over repeats at each sample: [sensor][time].
std::vector<std::vector<double>> best_estimate(const RepeatSet& repeats);

/// Random uncertainty sigma_~ = (1/sqrt(Ne)) sqrt((1/Ne) sum (T_i - mean)^2),
/// the population-variance form. Ne = 1 yields zeros; `single_repeat_warning`
/// (when non-null) is set in that case. sample_variance switches the 1/(Ne-1)
/// alternative on.
std::vector<std::vector<double>> random_uncertainty(const RepeatSet& repeats,
                                                    bool sample_variance = false,
                                                    bool* single_repeat_warning = nullptr);

/// Position uncertainty sigma_chi(t) = |dT/dx| * delta_x at the sensor,
/// using the model field's central-difference gradient (dimensional units).
std::vector<double> position_uncertainty(const Field1D& model_field, double sensor_chi,
                                         double delta_x_m, const ReferenceScales& scales,
                                         std::span<const double> times_s);

/// Root sum of squares of the three uncertainty components per sample.
std::vector<double> total_uncertainty(double sigma_s, std::span<const double> sigma_random,
                                      std::span<const double> sigma_position);

/// Samples per-sensor truth series on the observation grid, adds independent
/// zero-mean Gaussian noise with the given per-sample sigma and emits n_repeats
/// campaigns. Deterministic under the seed.
RepeatSet synthesize_observations(std::span<const TimeSeries> truth_per_sensor,
                                  std::span<const Sensor> sensors,
                                  std::span<const double> times_s,
                                  std::span<const std::vector<double>> sigma_per_sensor,
                                  int n_repeats, std::uint64_t seed);

/// Field1D truth variant: samples u(chi_j, tau) and converts to degC.
RepeatSet synthesize_observations(const Field1D& truth, const ReferenceScales& scales,
                                  std::span<const Sensor> sensors,
                                  std::span<const double> times_s,
                                  std::span<const std::vector<double>> sigma_per_sensor,
                                  int n_repeats, std::uint64_t seed);

/// Reads a sensor manifest (columns sensor_id,x_m) plus one CSV per repeat
/// (columns t_s,sensor_id,T_C). All repeats must share the time grid exactly;
/// no resampling happens here.
RepeatSet read_repeats(const std::filesystem::path& manifest,
                       std::span<const std::filesystem::path> repeat_files);

/// Writes a dataset as tidy CSV: t_s,sensor_id,T_C,sigma_C.
void write_dataset(const SensorDataset& data, const std::filesystem::path& path);

/// Reads a pre-built dataset (t_s,sensor_id,T_C,sigma_C) with its sensor
/// manifest. chi is left for the caller to fill from the geometry.
SensorDataset read_dataset(const std::filesystem::path& manifest,
                           const std::filesystem::path& dataset_csv);

/// Writes one repeat file: t_s,sensor_id,T_C.
void write_repeat(const RepeatSet& repeats, std::size_t repeat_index,
                  const std::filesystem::path& path);

}  // namespace therminv
