#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "therminv/aem.hpp"
#include "therminv/material.hpp"
#include "therminv/measurement.hpp"
#include "therminv/rng.hpp"
#include "therminv/solver1d.hpp"

namespace therminv {

enum class PriorFamily { uniform, gaussian };

struct PriorParam {
    PriorFamily family = PriorFamily::uniform;
    double lo = 0, hi = 1;   // support for uniform, walk normalization always
    double mean = 0, std = 1;  // gaussian only

    void validate(const std::string& name) const;
    double log_density(double p) const;
    double sample(Rng& rng) const;
    double span() const { return hi - lo; }
};

/// Priors over the physical pair (h_t, R_l). In Dirichlet mode only R_l is
/// estimated and the h_t prior is ignored.
struct PriorSpec {
    PriorParam h_t{PriorFamily::uniform, 1.0, 40.0};
    PriorParam R_l{PriorFamily::uniform, 0.01, 1.0};
    bool dirichlet = false;

    int n_active() const { return dirichlet ? 1 : 2; }
};

struct ChainState {
    double h_t = 0;  // +inf in Dirichlet mode
    double R_l = 0;
    double log_post = 0;
    bool accepted = false;
};

struct Chain {
    std::vector<ChainState> states;
    double walk_h_t = 0, walk_R_l = 0;  // normalized scale
    std::uint64_t seed = 0;
    int burn_in = 0;
};

struct Histogram {
    double lo = 0, hi = 0;
    std::vector<std::uint64_t> counts;
};

struct ParameterSummary {
    double mean = 0;
    double std = 0;  // population form over the retained states
    Histogram histogram;
    bool boundary_pinned = false;
};

struct ChainStats {
    std::optional<ParameterSummary> h_t;  // absent in Dirichlet mode
    ParameterSummary R_l;
    double acceptance_rate = 0;
    int n_states = 0;
    int burn_in = 0;
};

/// Gaussian log-likelihood of the sensor dataset at the physical parameters:
/// runs the lumped model, samples it at the sensors and observation times and
/// returns -1/2 sum ((u_hat - u - e)/sigma_tilde)^2 in dimensionless units.
/// Without an AEM, e = 0 and sigma_tilde = sigma. A failed forward solve
/// yields -inf.
double log_likelihood(const ParameterPoint& p, const SensorDataset& data,
                      const DimensionlessConfig& cfg, const Mesh1D& mesh,
                      const SolverControls& controls, const AemModel* aem);

/// One random-walk proposal: p* = p + w * span * U[-1,1] componentwise, with
/// w in the normalized parameter scale defined by the prior bounds.
std::pair<double, double> propose(double h_t, double R_l, const PriorSpec& prior,
                                  double w_h_t, double w_R_l, Rng& rng);

/// beta = min(1, exp(log_post_candidate - log_post_prev)); two impossible
/// states reject by convention.
double acceptance_factor(double log_post_candidate, double log_post_prev);

/// Log-posterior of the physical pair; -inf rejects the candidate outright.
using LogPosteriorFn = std::function<double(double h_t, double R_l)>;

struct McmcSettings {
    int n_states = 100000;
    int burn_in = 1000;
    double walk_h_t = 5e-4;  // normalized scale
    double walk_R_l = 5e-4;
    std::uint64_t seed = 1;
    std::optional<std::pair<double, double>> initial;  // drawn from prior when absent
};

/// Random-walk Metropolis-Hastings over the posterior. Proposals outside a
/// uniform prior's support are rejected through the -inf log-prior. The
/// chain is deterministic under the seed. The log-posterior callable already
/// contains the prior (use make_log_posterior to compose, or inject an
/// analytic target directly).
Chain run_mcmc(const LogPosteriorFn& log_posterior, const PriorSpec& prior,
               const McmcSettings& settings);

/// log-likelihood + log-prior with memoization on the exact parameter bits.
LogPosteriorFn make_log_posterior(const SensorDataset& data, const DimensionlessConfig& cfg,
                                  const Mesh1D& mesh, const SolverControls& controls,
                                  const AemModel* aem, const PriorSpec& prior,
                                  const PhysicalContext& ctx);

/// Mean, population std, histogram and boundary-pin flag per parameter over
/// states [burn_in, n). Throws DomainError when burn_in >= chain length.
ChainStats chain_stats(const Chain& chain, int burn_in, const PriorSpec& prior,
                       int histogram_bins = 50);

/// Chain CSV: state,h_t,R_l,log_post,accepted.
void write_chain(const Chain& chain, const std::filesystem::path& path);
Chain read_chain(const std::filesystem::path& path);

}  // namespace therminv
