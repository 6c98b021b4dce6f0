#include "therminv/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "therminv/errors.hpp"
#include "therminv/ode.hpp"
#include "lumped_system.hpp"

namespace therminv {

using detail::Dual3;
using detail::KernelParams;
using detail::LumpedSystem;

void SolverControls::validate() const {
    if (!(abs_tol > 0 && rel_tol > 0)) throw ConfigError("solver controls: tolerances must be > 0");
    if (!(max_step > 0)) throw ConfigError("solver controls: max_step must be > 0");
}

namespace detail {

void LumpedSystem::rhs(double tau, std::span<const double> y, std::span<double> dydt) {
    const int n = mesh_.n_nodes;
    const double u_inf = cfg_.u_inf(tau);

    KernelParams<double> kp{p_.bi_t, p_.bi_l, cfg_.fo1, cfg_.fo2, cfg_.r,
                            cfg_.kappa21, cfg_.kappa1_slope, cfg_.kappa2_slope,
                            cfg_.zeta1_slope, cfg_.zeta2_slope};
    if (dirichlet_) kp.bi_t = 0.0;  // unused in Dirichlet closures

    u_full_.resize(n);
    dudt_full_.resize(n);
    if (dirichlet_) {
        u_full_[0] = u_inf;
        u_full_[n - 1] = u_inf;
        std::copy(y.begin(), y.end(), u_full_.begin() + 1);
    } else {
        std::copy(y.begin(), y.end(), u_full_.begin());
    }

    const bool ok = lumped_rhs_kernel<double>(mesh_, kp, u_inf, dirichlet_,
                                              u_full_, dudt_full_);
    if (!ok) {
        violation_ = true;
        std::fill(dydt.begin(), dydt.end(), std::numeric_limits<double>::quiet_NaN());
        return;
    }
    std::copy(dudt_full_.begin() + first_node(), dudt_full_.begin() + first_node() + state_nodes(),
              dydt.begin());
}

void LumpedSystem::rhs_coupled(double tau, std::span<const double> y, std::span<double> dydt) {
    const int n = mesh_.n_nodes;
    const double u_inf = cfg_.u_inf(tau);

    // Tangent directions: 0 -> Bi_t, 1 -> Bi_l, 2 -> Fo_1.
    KernelParams<Dual3> kp{Dual3(dirichlet_ ? 0.0 : p_.bi_t, dirichlet_ ? 0.0 : 1.0, 0.0, 0.0),
                           Dual3(p_.bi_l, 0.0, 1.0, 0.0),
                           Dual3(cfg_.fo1, 0.0, 0.0, 1.0),
                           cfg_.fo2, cfg_.r, cfg_.kappa21,
                           cfg_.kappa1_slope, cfg_.kappa2_slope,
                           cfg_.zeta1_slope, cfg_.zeta2_slope};

    ud_full_.resize(n);
    dudt_dual_.resize(n);
    const int fn = first_node();
    const int sn = state_nodes();
    for (int i = 0; i < n; ++i) ud_full_[i] = Dual3(u_inf);  // pinned boundaries
    for (int s = 0; s < sn; ++s) {
        const double* q = y.data() + 4 * s;
        ud_full_[fn + s] = Dual3(q[0], q[1], q[2], q[3]);
    }

    const bool ok = lumped_rhs_kernel<Dual3>(mesh_, kp, u_inf, dirichlet_,
                                             ud_full_, dudt_dual_);
    if (!ok) {
        violation_ = true;
        std::fill(dydt.begin(), dydt.end(), std::numeric_limits<double>::quiet_NaN());
        return;
    }
    for (int s = 0; s < sn; ++s) {
        const Dual3& g = dudt_dual_[fn + s];
        double* q = dydt.data() + 4 * s;
        q[0] = g.v;
        q[1] = g.d[0];
        q[2] = g.d[1];
        q[3] = g.d[2];
    }
}

}  // namespace detail

void assemble_rhs(std::span<const double> u_nodes, double tau,
                  const DimensionlessConfig& cfg, const ParameterPoint& p,
                  const Mesh1D& mesh, std::span<double> dudt) {
    if (static_cast<int>(u_nodes.size()) != mesh.n_nodes)
        throw DomainError("assemble_rhs: node count mismatch");
    KernelParams<double> kp{p.bi_t, p.bi_l, cfg.fo1, cfg.fo2, cfg.r,
                            cfg.kappa21, cfg.kappa1_slope, cfg.kappa2_slope,
                            cfg.zeta1_slope, cfg.zeta2_slope};
    const bool ok = detail::lumped_rhs_kernel<double>(mesh, kp, cfg.u_inf(tau),
                                                      false, u_nodes, dudt);
    if (!ok)
        throw SolverError("assemble_rhs: property law outside validity range (effective capacity <= 0)", tau);
}

namespace {

std::vector<double> schedule_kinks(const DimensionlessConfig& cfg, double t_end) {
    std::vector<double> kinks;
    for (const auto& [t_s, T] : cfg.schedule.breakpoints()) {
        const double tau = t_s / cfg.scales.t0;
        if (tau > 0 && tau < t_end) kinks.push_back(tau);
    }
    return kinks;
}

}  // namespace

Field1D solve_lumped(const DimensionlessConfig& cfg, const ParameterPoint& p,
                     const Mesh1D& mesh, const SolverControls& controls,
                     std::span<const double> output_times) {
    controls.validate();
    if (output_times.empty()) throw DomainError("solve_lumped: no output times");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (output_times[i] < 0 || output_times[i] > 1.0 + 1e-12)
            throw DomainError("solve_lumped: output times must lie in [0,1]");
        if (i && output_times[i] <= output_times[i - 1])
            throw DomainError("solve_lumped: output times must be ascending");
    }
    if (!p.dirichlet() && !(p.bi_t >= 0))
        throw ConfigError("solve_lumped: bi_t must be >= 0");
    if (!(p.bi_l >= 0)) throw ConfigError("solve_lumped: bi_l must be >= 0");

    LumpedSystem system(cfg, p, mesh);
    const int dim = system.state_nodes();
    const double t_end = output_times.back();

    Field1D field(mesh, std::vector<double>(output_times.begin(), output_times.end()));

    std::vector<double> y0(dim, cfg.u_ini);

    OdeOptions opt;
    opt.abs_tol = controls.abs_tol;
    opt.rel_tol = controls.rel_tol;
    opt.max_step = controls.max_step;
    opt.critical_times = schedule_kinks(cfg, t_end);

    auto emit = [&](std::size_t idx, double /*t*/, std::span<const double> y) {
        auto row = field.row(idx);
        if (system.dirichlet()) {
            const double u_inf = cfg.u_inf(field.times()[idx]);
            row[0] = idx == 0 ? cfg.u_ini : u_inf;
            row[mesh.n_nodes - 1] = idx == 0 ? cfg.u_ini : u_inf;
            std::copy(y.begin(), y.end(), row.begin() + 1);
        } else {
            std::copy(y.begin(), y.end(), row.begin());
        }
    };

    if (t_end == 0.0) {
        emit(0, 0.0, y0);
        return field;
    }

    try {
        integrate_trbdf2([&](double t, std::span<const double> y, std::span<double> dy) {
                             system.rhs(t, y, dy);
                         },
                         dim, LumpedSystem::kForwardKl, LumpedSystem::kForwardKu,
                         y0, 0.0, t_end, output_times, emit, opt);
    } catch (const SolverError& e) {
        if (system.validity_violated())
            throw SolverError("solve_lumped: property law outside validity range (effective capacity <= 0)",
                              e.time);
        throw;
    }
    return field;
}

}  // namespace therminv
