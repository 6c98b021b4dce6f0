#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace therminv {

struct GaussianPrior {
    double mean = 0;
    double std = 0;
};

/// Prior over the estimated pair used for the error-model sampling. The
/// complete model's lateral film is tied to the drawn R_l by h_l_scale.
struct AemPriors {
    GaussianPrior h_t{8.0, 2.5};
    GaussianPrior R_l{0.5, 0.2};
    double h_l_scale = 4.0;

    std::string describe() const;
};

/// Statistical description of the lumped-vs-complete discrepancy on the
/// observation grid: per sensor and time, mean error e = T_lumped - T_complete
/// and its standard deviation s_e (both degC).
struct AemModel {
    std::vector<std::string> sensor_ids;
    std::vector<double> times;              // s
    std::vector<std::vector<double>> e;     // [sensor][time]
    std::vector<std::vector<double>> s_e;   // [sensor][time]
    int n_samples = 0;
    int n_skipped = 0;
    std::string prior_descriptor;
    std::uint64_t seed = 0;
};

/// Sensor series in degC for one parameter draw: [sensor][time] on the
/// model's observation grid.
using ForwardSeriesFn = std::function<std::vector<std::vector<double>>(double, double)>;

struct AemForwardModels {
    ForwardSeriesFn lumped;    // (h_t, R_l) -> series
    ForwardSeriesFn complete;  // (h_t, h_l) -> series
};

/// Draws n_samples (h_t, R_l) pairs from the priors, runs both models per
/// draw (h_l = h_l_scale * R_l) and reduces the per-sample errors into mean
/// and sample standard deviation. Failed forward solves are skipped and
/// counted; more than 10% skipped aborts the build. Sample pairs may be
/// evaluated on up to n_threads threads; the reduction order is fixed by
/// sample index, so the result is bit-identical for a given seed.
AemModel build_aem(const AemForwardModels& models, const AemPriors& priors, int n_samples,
                   std::span<const std::string> sensor_ids, std::span<const double> times_s,
                   std::uint64_t seed, int n_threads = 1);

/// Returns (residual - e, sigma_tilde) with sigma_tilde = sqrt(sigma^2 + s_e^2)
/// for one sensor. Grids must match the model's.
std::pair<std::vector<double>, std::vector<double>> apply_aem(
    std::span<const double> residual_C, std::span<const double> sigma_C,
    const AemModel& model, std::size_t sensor_index);

/// Artifact files: CSV sensor_id,t_s,e_C,s_e_C plus a JSON sidecar carrying
/// the prior descriptor, seed and sample counts.
void save_aem(const AemModel& model, const std::filesystem::path& csv_path,
              const std::filesystem::path& json_path);
AemModel load_aem(const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

}  // namespace therminv
