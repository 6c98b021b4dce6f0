#include "therminv/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "therminv/errors.hpp"
#include "therminv/ode.hpp"
#include "lumped_system.hpp"

namespace therminv {

using detail::LumpedSystem;

std::pair<Field1D, SensitivityFields> solve_sensitivities(
    const DimensionlessConfig& cfg, const ParameterPoint& p, const Mesh1D& mesh,
    const SolverControls& controls, std::span<const double> output_times) {
    controls.validate();
    if (output_times.empty()) throw DomainError("solve_sensitivities: no output times");

    LumpedSystem system(cfg, p, mesh);
    const int sn = system.state_nodes();
    const int dim = 4 * sn;
    const double t_end = output_times.back();

    std::vector<double> times(output_times.begin(), output_times.end());
    Field1D u(mesh, times), theta(mesh, times), psi(mesh, times), phi(mesh, times);

    std::vector<double> y0(dim, 0.0);
    for (int s = 0; s < sn; ++s) y0[4 * s] = cfg.u_ini;

    OdeOptions opt;
    opt.abs_tol = controls.abs_tol;
    opt.rel_tol = controls.rel_tol;
    opt.max_step = controls.max_step;
    for (const auto& [t_s, T] : cfg.schedule.breakpoints()) {
        const double tau = t_s / cfg.scales.t0;
        if (tau > 0 && tau < t_end) opt.critical_times.push_back(tau);
    }

    const int fn = system.first_node();
    auto emit = [&](std::size_t idx, double t, std::span<const double> y) {
        auto ru = u.row(idx);
        auto rt = theta.row(idx);
        auto rp = psi.row(idx);
        auto rf = phi.row(idx);
        if (system.dirichlet()) {
            const double u_inf = cfg.u_inf(t);
            const double ub = idx == 0 ? cfg.u_ini : u_inf;
            ru[0] = ru[mesh.n_nodes - 1] = ub;
            rt[0] = rt[mesh.n_nodes - 1] = 0.0;
            rp[0] = rp[mesh.n_nodes - 1] = 0.0;
            rf[0] = rf[mesh.n_nodes - 1] = 0.0;
        }
        for (int s = 0; s < sn; ++s) {
            ru[fn + s] = y[4 * s];
            rt[fn + s] = y[4 * s + 1];
            rp[fn + s] = y[4 * s + 2];
            rf[fn + s] = y[4 * s + 3];
        }
    };

    if (t_end == 0.0) {
        emit(0, 0.0, y0);
        return {std::move(u), SensitivityFields{std::move(theta), std::move(psi), std::move(phi)}};
    }

    try {
        integrate_trbdf2([&](double t, std::span<const double> y, std::span<double> dy) {
                             system.rhs_coupled(t, y, dy);
                         },
                         dim, LumpedSystem::kCoupledKl, LumpedSystem::kCoupledKu,
                         y0, 0.0, t_end, output_times, emit, opt);
    } catch (const SolverError& e) {
        if (system.validity_violated())
            throw SolverError("solve_sensitivities: property law outside validity range", e.time);
        throw;
    }
    return {std::move(u), SensitivityFields{std::move(theta), std::move(psi), std::move(phi)}};
}

FisherMatrix fisher_matrix(const SensitivityFields& sens,
                           std::span<const double> sensor_chis,
                           std::span<const TimeSeries> sigma_C,
                           const ReferenceScales& scales) {
    if (sensor_chis.size() != sigma_C.size())
        throw DomainError("fisher_matrix: one sigma series per sensor required");
    const auto& taus = sens.theta.times();
    if (taus.size() < 2) throw DomainError("fisher_matrix: need at least two output times");

    FisherMatrix f;
    std::vector<double> w(taus.size());  // trapezoid weights in seconds
    for (std::size_t k = 0; k < taus.size(); ++k) {
        double dw = 0;
        if (k > 0) dw += 0.5 * (taus[k] - taus[k - 1]);
        if (k + 1 < taus.size()) dw += 0.5 * (taus[k + 1] - taus[k]);
        w[k] = dw * scales.t0;
    }

    for (std::size_t j = 0; j < sensor_chis.size(); ++j) {
        for (std::size_t k = 0; k < taus.size(); ++k) {
            const double sig = sigma_C[j].at(taus[k] * scales.t0) / scales.T0;
            if (!(sig > 0)) throw DomainError("fisher_matrix: sigma must be > 0 everywhere");
            const double th = sens.theta.sample_at(sensor_chis[j], taus[k]);
            const double ps = sens.psi.sample_at(sensor_chis[j], taus[k]);
            const double inv2 = w[k] / (sig * sig);
            f.f11 += th * th * inv2;
            f.f22 += ps * ps * inv2;
            f.f12 += th * ps * inv2;
        }
    }
    return f;
}

std::pair<double, double> error_indicators(const FisherMatrix& f) {
    if (!(f.f11 > 0) || !(f.f22 > 0))
        throw DomainError("error_indicators: zero diagonal, parameter unidentifiable");
    return {1.0 / std::sqrt(f.f11), 1.0 / std::sqrt(f.f22)};
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("correlation: size mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw DomainError("correlation: need at least two samples");
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (!(saa > 0) || !(sbb > 0)) throw DomainError("correlation: zero variance");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace therminv
