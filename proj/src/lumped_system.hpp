// Shared discrete right-hand side of the lumped two-layer problem.
//
// The kernel is templated on the scalar type so the same stencils serve two
// purposes: with double it is the forward model, with Dual3 (value plus three
// tangents seeded by theta/psi/phi and the parameter directions) it yields
// the discrete sensitivity equations as exact directional derivatives of the
// forward stencils. Boundary and interface sensitivity conditions therefore
// come out consistent with the forward discretization by construction.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "therminv/errors.hpp"
#include "therminv/field1d.hpp"
#include "therminv/material.hpp"

namespace therminv::detail {

struct Dual3 {
    double v = 0;
    double d[3] = {0, 0, 0};

    Dual3() = default;
    Dual3(double value) : v(value) {}  // NOLINT: implicit by design
    Dual3(double value, double d0, double d1, double d2) : v(value), d{d0, d1, d2} {}
};

inline Dual3 operator+(const Dual3& a, const Dual3& b) {
    return {a.v + b.v, a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2]};
}
inline Dual3 operator-(const Dual3& a, const Dual3& b) {
    return {a.v - b.v, a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2]};
}
inline Dual3 operator-(const Dual3& a) { return {-a.v, -a.d[0], -a.d[1], -a.d[2]}; }
inline Dual3 operator*(const Dual3& a, const Dual3& b) {
    return {a.v * b.v,
            a.d[0] * b.v + a.v * b.d[0],
            a.d[1] * b.v + a.v * b.d[1],
            a.d[2] * b.v + a.v * b.d[2]};
}
inline Dual3 operator/(const Dual3& a, const Dual3& b) {
    const double inv = 1.0 / b.v;
    const double q = a.v * inv;
    return {q,
            (a.d[0] - q * b.d[0]) * inv,
            (a.d[1] - q * b.d[1]) * inv,
            (a.d[2] - q * b.d[2]) * inv};
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual3& x) { return x.v; }

/// Material-parameter bundle for the kernel; S is double or Dual3.
template <class S>
struct KernelParams {
    S bi_t;   // ignored in Dirichlet mode
    S bi_l;
    S fo1;
    double fo2;
    double r;
    double kappa21;
    double kappa1_slope, kappa2_slope;
    double zeta1_slope, zeta2_slope;
};

/// Evaluates du/dtau for all nodes. u must hold all n_nodes values; in
/// Dirichlet mode the caller pins u[0] and u[n-1] to u_inf and the boundary
/// derivatives are left at zero. Returns false if a property law left its
/// validity range (effective capacity through zero); dudt is then invalid.
template <class S>
bool lumped_rhs_kernel(const Mesh1D& mesh, const KernelParams<S>& p, double u_inf,
                       bool dirichlet, std::span<const S> u, std::span<S> dudt) {
    const int n = mesh.n_nodes;
    const int m = mesh.interface_index;
    const double h = mesh.h();
    const double sign1 = value_of(p.fo1) > 0 ? 1.0 : -1.0;
    const double sign2 = p.fo2 > 0 ? 1.0 : -1.0;

    auto kappa1 = [&](const S& x) { return S(1.0) + S(p.kappa1_slope) * x; };
    auto kappa2 = [&](const S& x) { return S(1.0) + S(p.kappa2_slope) * x; };
    auto zeta1 = [&](const S& x) { return S(1.0) + S(p.zeta1_slope) * x; };
    auto zeta2 = [&](const S& x) { return S(1.0) + S(p.zeta2_slope) * x; };

    // Conservative face fluxes, conductivity at the cell midpoint value.
    auto flux1 = [&](int i) {  // cell (i, i+1), wood fiber
        return kappa1(S(0.5) * (u[i] + u[i + 1])) * (u[i + 1] - u[i]) / S(h);
    };
    auto flux2 = [&](int i) {  // cell (i, i+1), insulator
        return kappa2(S(0.5) * (u[i] + u[i + 1])) * (u[i + 1] - u[i]) / S(h);
    };

    for (int i = 0; i <= m; ++i)
        if (!(sign1 * value_of(zeta1(u[i])) > 0)) return false;
    for (int i = m; i < n; ++i)
        if (!(sign2 * value_of(zeta2(u[i])) > 0)) return false;

    const S src_coef = p.bi_l * S(p.r) * p.fo1;
    const S uinf = S(u_inf);

    if (!dirichlet) {
        // Robin closure at chi = 0: half-cell balance with the boundary flux
        // given by kappa1(u) du/dchi = Bi_t (u - u_inf).
        const S bflux = p.bi_t * (u[0] - uinf);
        dudt[0] = (p.fo1 * (flux1(0) - bflux) * S(2.0 / h) + src_coef * (uinf - u[0])) /
                  zeta1(u[0]);
    } else {
        dudt[0] = S(0.0);
    }

    S right = flux1(0);
    for (int i = 1; i < m; ++i) {
        const S left = right;
        right = flux1(i);
        dudt[i] = (p.fo1 * (right - left) * S(1.0 / h) + src_coef * (uinf - u[i])) /
                  zeta1(u[i]);
    }

    // Interface node: two-sided flux balance with half-cell capacities from
    // both materials; the lateral source acts on the wood-fiber half only.
    {
        const S num = S(p.kappa21) * flux2(m) - right +
                      p.bi_l * S(p.r) * S(0.5 * h) * (uinf - u[m]);
        const S den = S(0.5 * h) *
                      (zeta1(u[m]) / p.fo1 + S(p.kappa21 / p.fo2) * zeta2(u[m]));
        dudt[m] = num / den;
    }

    right = flux2(m);
    for (int i = m + 1; i < n - 1; ++i) {
        const S left = right;
        right = flux2(i);
        dudt[i] = S(p.fo2) * (right - left) * S(1.0 / h) / zeta2(u[i]);
    }

    if (!dirichlet) {
        // Robin closure at chi = 1: kappa21 kappa2(u) du/dchi = -Bi_t (u - u_inf).
        const S bflux = -(p.bi_t / S(p.kappa21)) * (u[n - 1] - uinf);
        dudt[n - 1] = S(p.fo2) * (bflux - right) * S(2.0 / h) / zeta2(u[n - 1]);
    } else {
        dudt[n - 1] = S(0.0);
    }
    return true;
}

/// State mapping and ODE adapters around the kernel. In Robin mode the state
/// is every node; in Dirichlet mode the boundary nodes are pinned to
/// u_inf(tau) and excluded from the state.
class LumpedSystem {
public:
    LumpedSystem(const DimensionlessConfig& cfg, const ParameterPoint& p, const Mesh1D& mesh)
        : cfg_(cfg), p_(p), mesh_(mesh), dirichlet_(p.dirichlet()) {}

    int n_nodes() const { return mesh_.n_nodes; }
    int state_nodes() const { return dirichlet_ ? mesh_.n_nodes - 2 : mesh_.n_nodes; }
    int first_node() const { return dirichlet_ ? 1 : 0; }
    bool dirichlet() const { return dirichlet_; }
    bool validity_violated() const { return violation_; }

    /// Forward model only: state -> du/dtau (state-sized).
    void rhs(double tau, std::span<const double> y, std::span<double> dydt);

    /// Coupled forward + sensitivities. State layout per node:
    /// [u, theta, psi, phi] interleaved.
    void rhs_coupled(double tau, std::span<const double> y, std::span<double> dydt);

    static constexpr int kForwardKl = 1, kForwardKu = 1;
    static constexpr int kCoupledKl = 7, kCoupledKu = 4;

private:
    const DimensionlessConfig& cfg_;
    ParameterPoint p_;
    Mesh1D mesh_;
    bool dirichlet_;
    bool violation_ = false;
    std::vector<double> u_full_, dudt_full_;
    std::vector<Dual3> ud_full_, dudt_dual_;
};

}  // namespace therminv::detail
