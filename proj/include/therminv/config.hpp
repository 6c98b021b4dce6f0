#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "therminv/aem.hpp"
#include "therminv/inference.hpp"
#include "therminv/material.hpp"
#include "therminv/measurement.hpp"
#include "therminv/solver1d.hpp"
#include "therminv/solver2d.hpp"

namespace therminv {

enum class BoundaryMode { robin, dirichlet_top };

struct ObservationConfig {
    double dt_s = 60.0;
    double sigma_s_C = 0.3;
    double position_uncertainty_m = 0.005;
    int n_repeats = 3;
    bool sample_variance = false;  // 1/(Ne-1) alternative for sigma_~
};

struct Solver2dConfig {
    double dt_s = 0.5;
    double resolution_m = 2e-3;
    int tape_cells = 3;
    double snapshot_dt_s = 3600.0;
    double diagnostics_dt_s = 300.0;
};

struct DiagnosticsConfig {
    double flux_x_lo_m = 0.0;
    double flux_x_hi_m = 0.048;
};

struct McmcConfig {
    int n_states = 100000;
    int burn_in = 1000;
    double walk_h_t = 5e-4;
    double walk_R_l = 5e-4;
    std::uint64_t seed = 1;
    int histogram_bins = 50;
};

struct AemConfig {
    bool enabled = true;
    int n_samples = 1000;
    std::uint64_t seed = 2;
    AemPriors priors;
};

/// Full problem description as loaded from the JSON configuration file.
struct RunConfig {
    Geometry geometry;
    MaterialLayer wood_fiber, insulator, aluminum;
    ReferenceScales scales;
    BoundarySchedule schedule;
    double initial_temperature_C = 20.0;
    BoundaryMode mode = BoundaryMode::robin;
    std::vector<Sensor> sensors;
    ObservationConfig observation;
    double apriori_h_t = 8.0;
    double apriori_R_l = 0.5;
    SolverControls controls;
    int n_nodes = 101;
    Solver2dConfig solver2d;
    DiagnosticsConfig diagnostics;
    PriorSpec prior;
    McmcConfig mcmc;
    AemConfig aem;

    bool dirichlet() const { return mode == BoundaryMode::dirichlet_top; }
};

/// Loads and validates a configuration; unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);

/// Ships the measured chamber program and material set as a ready-to-run
/// configuration (written by `therminv init-config`).
std::string default_config_json();

/// Parameter triple for simulate/synth/validate --params files. h_l falls
/// back to aem.h_l_scale * R_l when the file omits it.
struct ParamsFile {
    double h_t = 8.0;
    double R_l = 0.5;
    std::optional<double> h_l;
};
ParamsFile load_params_file(const std::filesystem::path& path);

}  // namespace therminv
