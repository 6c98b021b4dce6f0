#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "therminv/config.hpp"

namespace therminv {

/// Shared wiring between the configuration record and the solver modules.
namespace pipeline {

DimensionlessConfig dimensionless(const RunConfig& cfg, double h_t, double R_l);
ParameterPoint parameter_point(const RunConfig& cfg, double h_t, double R_l);
PhysicalContext physical_context(const RunConfig& cfg);
Mesh1D mesh1d(const RunConfig& cfg);
Mesh2D mesh2d(const RunConfig& cfg);

/// Observation grid 0 .. t0 with the configured sampling step (seconds).
std::vector<double> observation_times(const RunConfig& cfg);
std::vector<double> observation_taus(const RunConfig& cfg);
std::vector<double> sensor_chis(const RunConfig& cfg);

/// Lumped sensor series in degC on the observation grid.
std::vector<std::vector<double>> lumped_sensor_series(const RunConfig& cfg, double h_t,
                                                      double R_l);

/// Complete-model sensor series in degC on the observation grid (probes at
/// the sensor positions on the mid-width line).
std::vector<std::vector<double>> complete_sensor_series(const RunConfig& cfg, double h_t,
                                                        double h_l, bool strict,
                                                        std::vector<std::string>* warnings = nullptr);

/// Position-uncertainty series per sensor from the a-priori lumped field.
std::vector<std::vector<double>> apriori_position_uncertainty(const RunConfig& cfg);

/// Full uncertainty pipeline: best estimate + sigma_s/sigma_~/sigma_chi.
SensorDataset build_dataset(const RunConfig& cfg, const RepeatSet& repeats);

/// AEM forward-model pair on the observation grid.
AemForwardModels aem_forward_models(const RunConfig& cfg, bool strict);

int thread_cap();  // THERMINV_THREADS or hardware concurrency

}  // namespace pipeline

/// CLI command implementations; return process exit codes (0 ok,
/// 2 configuration/validation, 3 numerical failure).
namespace commands {

struct CommonArgs {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    bool strict = false;
};

int simulate(const CommonArgs& args, const std::string& model,
             const std::filesystem::path& params_file);
int sensitivity(const CommonArgs& args);
int aem(const CommonArgs& args, std::uint64_t seed, bool seed_given);
int synth(const CommonArgs& args, const std::filesystem::path& params_file,
          std::uint64_t seed, bool seed_given);
int estimate(const CommonArgs& args, const std::filesystem::path& data_dir,
             const std::filesystem::path& aem_file, std::uint64_t seed, bool seed_given);
int validate(const CommonArgs& args, const std::filesystem::path& params_file);

}  // namespace commands

}  // namespace therminv
