#include "therminv/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <map>

#include "therminv/csv.hpp"
#include "therminv/errors.hpp"

namespace therminv {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void PriorParam::validate(const std::string& name) const {
    if (!(lo < hi)) throw ConfigError("prior " + name + ": lo must be < hi");
    if (family == PriorFamily::gaussian && !(std > 0))
        throw ConfigError("prior " + name + ": gaussian std must be > 0");
}

double PriorParam::log_density(double p) const {
    if (family == PriorFamily::uniform)
        return (p < lo || p > hi) ? kNegInf : 0.0;
    const double z = (p - mean) / std;
    return -0.5 * z * z;  // unnormalized
}

double PriorParam::sample(Rng& rng) const {
    if (family == PriorFamily::uniform) return rng.uniform(lo, hi);
    return mean + std * rng.gaussian();
}

double log_likelihood(const ParameterPoint& p, const SensorDataset& data,
                      const DimensionlessConfig& cfg, const Mesh1D& mesh,
                      const SolverControls& controls, const AemModel* aem) {
    if (data.sensors.empty() || data.times.empty())
        throw DomainError("log_likelihood: empty dataset");

    std::vector<double> taus(data.times.size());
    for (std::size_t n = 0; n < taus.size(); ++n) taus[n] = data.times[n] / cfg.scales.t0;

    Field1D field;
    try {
        field = solve_lumped(cfg.with_parameters(p), p, mesh, controls, taus);
    } catch (const std::exception&) {
        return kNegInf;
    }

    const double T0 = cfg.scales.T0;
    double sum = 0;
    for (std::size_t j = 0; j < data.sensors.size(); ++j) {
        for (std::size_t n = 0; n < data.times.size(); ++n) {
            const double sigma = data.sigma[j][n];
            if (!(sigma > 0)) throw DomainError("log_likelihood: sigma must be > 0");
            const double u_hat = data.values[j][n] / T0;
            const double u_model = field.sample_at(data.chi[j], taus[n]);
            double residual = u_hat - u_model;
            double sigma_tilde = sigma / T0;
            if (aem) {
                residual -= aem->e[j][n] / T0;
                const double se = aem->s_e[j][n] / T0;
                sigma_tilde = std::sqrt(sigma_tilde * sigma_tilde + se * se);
            }
            const double z = residual / sigma_tilde;
            sum += z * z;
        }
    }
    return -0.5 * sum;
}

std::pair<double, double> propose(double h_t, double R_l, const PriorSpec& prior,
                                  double w_h_t, double w_R_l, Rng& rng) {
    double h_new = h_t;
    if (!prior.dirichlet) h_new = h_t + w_h_t * prior.h_t.span() * rng.symmetric();
    const double r_new = R_l + w_R_l * prior.R_l.span() * rng.symmetric();
    return {h_new, r_new};
}

double acceptance_factor(double log_post_candidate, double log_post_prev) {
    if (log_post_candidate == kNegInf) return 0.0;
    if (log_post_prev == kNegInf) return 1.0;  // escape an impossible state
    return std::min(1.0, std::exp(log_post_candidate - log_post_prev));
}

Chain run_mcmc(const LogPosteriorFn& log_posterior, const PriorSpec& prior,
               const McmcSettings& settings) {
    if (settings.n_states < 1) throw ConfigError("run_mcmc: n_states must be >= 1");
    prior.R_l.validate("R_l");
    if (!prior.dirichlet) prior.h_t.validate("h_t");

    Rng rng(settings.seed);

    double h_t, R_l;
    if (settings.initial) {
        h_t = settings.initial->first;
        R_l = settings.initial->second;
    } else {
        h_t = prior.dirichlet ? std::numeric_limits<double>::infinity() : prior.h_t.sample(rng);
        R_l = prior.R_l.sample(rng);
    }
    if (prior.dirichlet) h_t = std::numeric_limits<double>::infinity();

    double lp = log_posterior(h_t, R_l);

    Chain chain;
    chain.states.reserve(settings.n_states);
    chain.walk_h_t = settings.walk_h_t;
    chain.walk_R_l = settings.walk_R_l;
    chain.seed = settings.seed;
    chain.burn_in = settings.burn_in;

    for (int k = 0; k < settings.n_states; ++k) {
        const auto [h_cand, r_cand] =
            propose(h_t, R_l, prior, settings.walk_h_t, settings.walk_R_l, rng);
        const double lp_cand = log_posterior(h_cand, r_cand);
        const double beta = acceptance_factor(lp_cand, lp);
        const double U = rng.uniform01();
        const bool accept = U <= beta && beta > 0.0;
        if (accept) {
            h_t = h_cand;
            R_l = r_cand;
            lp = lp_cand;
        }
        chain.states.push_back({h_t, R_l, lp, accept});
    }
    return chain;
}

LogPosteriorFn make_log_posterior(const SensorDataset& data, const DimensionlessConfig& cfg,
                                  const Mesh1D& mesh, const SolverControls& controls,
                                  const AemModel* aem, const PriorSpec& prior,
                                  const PhysicalContext& ctx) {
    // The chain revisits rejected-candidate predecessors constantly; caching
    // on the exact parameter bits avoids re-solving the PDE for them.
    auto cache = std::make_shared<std::map<std::pair<std::uint64_t, std::uint64_t>, double>>();
    return [=](double h_t, double R_l) {
        double log_prior = prior.R_l.log_density(R_l);
        if (!prior.dirichlet) log_prior += prior.h_t.log_density(h_t);
        if (log_prior == kNegInf) return kNegInf;

        const auto key = std::make_pair(std::bit_cast<std::uint64_t>(h_t),
                                        std::bit_cast<std::uint64_t>(R_l));
        double log_like;
        if (auto it = cache->find(key); it != cache->end()) {
            log_like = it->second;
        } else {
            const ParameterPoint p = parameters_to_dimensionless(h_t, R_l, ctx);
            log_like = log_likelihood(p, data, cfg, mesh, controls, aem);
            cache->emplace(key, log_like);
        }
        return log_like == kNegInf ? kNegInf : log_like + log_prior;
    };
}

namespace {

ParameterSummary summarize(std::span<const double> samples, const PriorParam& prior, int bins) {
    ParameterSummary s;
    const double n = static_cast<double>(samples.size());
    for (double v : samples) s.mean += v;
    s.mean /= n;
    for (double v : samples) s.std += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(s.std / n);

    auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    s.histogram.lo = *mn;
    s.histogram.hi = *mx;
    s.histogram.counts.assign(bins, 0);
    const double width = *mx - *mn;
    for (double v : samples) {
        int b = width > 0 ? static_cast<int>((v - *mn) / width * bins) : 0;
        s.histogram.counts[std::clamp(b, 0, bins - 1)]++;
    }

    // Posterior mass piling up on a prior bound signals an unidentified
    // upper/lower limit rather than a genuine mode.
    const double margin = 0.01 * prior.span();
    std::size_t pinned = 0;
    for (double v : samples)
        if (v <= prior.lo + margin || v >= prior.hi - margin) ++pinned;
    s.boundary_pinned = pinned * 2 >= samples.size();
    return s;
}

}  // namespace

ChainStats chain_stats(const Chain& chain, int burn_in, const PriorSpec& prior,
                       int histogram_bins) {
    const int n = static_cast<int>(chain.states.size());
    if (burn_in < 0 || burn_in >= n)
        throw DomainError("chain_stats: burn-in must lie inside the chain");
    if (histogram_bins < 1) throw DomainError("chain_stats: need at least one bin");

    std::vector<double> ht, rl;
    ht.reserve(n - burn_in);
    rl.reserve(n - burn_in);
    int accepted = 0;
    for (int k = 0; k < n; ++k) {
        if (chain.states[k].accepted) ++accepted;
        if (k >= burn_in) {
            ht.push_back(chain.states[k].h_t);
            rl.push_back(chain.states[k].R_l);
        }
    }

    ChainStats stats;
    stats.n_states = n;
    stats.burn_in = burn_in;
    stats.acceptance_rate = static_cast<double>(accepted) / n;
    if (!prior.dirichlet) stats.h_t = summarize(ht, prior.h_t, histogram_bins);
    stats.R_l = summarize(rl, prior.R_l, histogram_bins);
    return stats;
}

void write_chain(const Chain& chain, const std::filesystem::path& path) {
    CsvWriter out(path, {"state", "h_t", "R_l", "log_post", "accepted"});
    for (std::size_t k = 0; k < chain.states.size(); ++k) {
        const auto& st = chain.states[k];
        out.row({std::to_string(k), format_double(st.h_t), format_double(st.R_l),
                 format_double(st.log_post), st.accepted ? "1" : "0"});
    }
}

Chain read_chain(const std::filesystem::path& path) {
    const CsvTable tab = read_csv(path);
    const std::size_t ch = tab.column("h_t", path.string());
    const std::size_t cr = tab.column("R_l", path.string());
    const std::size_t cl = tab.column("log_post", path.string());
    const std::size_t ca = tab.column("accepted", path.string());
    Chain chain;
    for (const auto& row : tab.rows)
        chain.states.push_back({parse_double(row[ch], path.string()),
                                parse_double(row[cr], path.string()),
                                parse_double(row[cl], path.string()), row[ca] == "1"});
    return chain;
}

}  // namespace therminv
