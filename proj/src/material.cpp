#include "therminv/material.hpp"

#include <algorithm>
#include <string>

#include "therminv/errors.hpp"

namespace therminv {

void MaterialLayer::validate(double T_lo_C, double T_hi_C, double T0_C, const char* name) const {
    const std::string who(name);
    if (!(thickness > 0)) throw ConfigError(who + ": thickness must be > 0");
    if (!(T0_C > 0)) throw ConfigError(who + ": reference temperature must be > 0");
    // Affine laws are monotone in T, so checking the range ends suffices.
    for (double T : {T_lo_C, T_hi_C}) {
        if (!(conductivity(T, T0_C) > 0))
            throw ConfigError(who + ": effective conductivity <= 0 at " + std::to_string(T) + " degC");
        if (!(capacity(T, T0_C) > 0))
            throw ConfigError(who + ": effective capacity <= 0 at " + std::to_string(T) + " degC");
    }
}

void Geometry::validate() const {
    if (!(L0x > 0 && L0y > 0 && L0z > 0))
        throw ConfigError("geometry: all dimensions must be > 0");
    if (layer_boundaries.size() < 2)
        throw ConfigError("geometry: need at least two layer boundaries");
    if (layer_boundaries.front() != 0.0)
        throw ConfigError("geometry: first layer boundary must be 0");
    for (std::size_t i = 1; i < layer_boundaries.size(); ++i)
        if (!(layer_boundaries[i] > layer_boundaries[i - 1]))
            throw ConfigError("geometry: layer boundaries must be strictly increasing");
    if (layer_boundaries.back() != L0x)
        throw ConfigError("geometry: last layer boundary must equal L0x");
    if (aluminum_thickness < 0)
        throw ConfigError("geometry: aluminum thickness must be >= 0");
}

BoundarySchedule::BoundarySchedule(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    if (points_.empty()) throw ConfigError("schedule: no breakpoints");
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (!(points_[i].first > points_[i - 1].first))
            throw ConfigError("schedule: breakpoint times must be strictly increasing");
}

double BoundarySchedule::temperature(double t_s) const {
    if (points_.empty()) throw ConfigError("schedule: no breakpoints");
    if (t_s <= points_.front().first) return points_.front().second;
    if (t_s >= points_.back().first) return points_.back().second;
    std::size_t hi = 1;
    while (points_[hi].first < t_s) ++hi;
    const auto& [t0, v0] = points_[hi - 1];
    const auto& [t1, v1] = points_[hi];
    return v0 + (v1 - v0) * (t_s - t0) / (t1 - t0);
}

double BoundarySchedule::min_temperature() const {
    double m = points_.front().second;
    for (const auto& [t, v] : points_) m = std::min(m, v);
    return m;
}

double BoundarySchedule::max_temperature() const {
    double m = points_.front().second;
    for (const auto& [t, v] : points_) m = std::max(m, v);
    return m;
}

BoundarySchedule BoundarySchedule::paper_default() {
    return BoundarySchedule({{0.0, 20.0}, {18000.0, 30.0}, {54000.0, 30.0}, {72000.0, 20.0}});
}

void ReferenceScales::validate() const {
    if (!(T0 > 0 && t0 > 0 && L0x > 0))
        throw ConfigError("scales: T0, t0 and L0x must all be > 0");
}

DimensionlessConfig nondimensionalize(const MaterialLayer& wood_fiber,
                                      const MaterialLayer& insulator,
                                      const Geometry& geometry,
                                      const ReferenceScales& scales,
                                      double h_t, double R_l,
                                      const BoundarySchedule& schedule,
                                      double T_ini_C) {
    scales.validate();
    geometry.validate();
    if (!(wood_fiber.k0 > 0))
        throw ConfigError("nondimensionalize: wood-fiber k0 must be > 0");
    if (insulator.k0 == 0 || wood_fiber.c0 == 0 || insulator.c0 == 0)
        throw ConfigError("nondimensionalize: zero property intercept");
    if (h_t < 0 && !std::isinf(h_t)) throw ConfigError("nondimensionalize: h_t must be >= 0");
    if (R_l < 0) throw ConfigError("nondimensionalize: R_l must be >= 0");

    const double L2 = geometry.L0x * geometry.L0x;

    DimensionlessConfig cfg;
    cfg.fo1 = wood_fiber.k0 * scales.t0 / (wood_fiber.c0 * L2);
    cfg.fo2 = insulator.k0 * scales.t0 / (insulator.c0 * L2);
    cfg.bi_t = std::isinf(h_t) ? h_t : h_t * geometry.L0x / wood_fiber.k0;
    cfg.bi_l = 4.0 * R_l * geometry.L0x / wood_fiber.k0;
    cfg.r = geometry.L0x / geometry.L0y;
    cfg.kappa21 = insulator.k0 / wood_fiber.k0;
    cfg.kappa1_slope = wood_fiber.k1 / wood_fiber.k0;
    cfg.kappa2_slope = insulator.k1 / insulator.k0;
    cfg.zeta1_slope = wood_fiber.c1 / wood_fiber.c0;
    cfg.zeta2_slope = insulator.c1 / insulator.c0;
    cfg.u_ini = T_ini_C / scales.T0;
    cfg.chi_interface = geometry.interface_x() / geometry.L0x;
    cfg.schedule = schedule;
    cfg.scales = scales;

    if (!(cfg.chi_interface > 0 && cfg.chi_interface < 1))
        throw ConfigError("nondimensionalize: interface must lie strictly inside (0, L0x)");
    return cfg;
}

ParameterPoint parameters_to_dimensionless(double h_t, double R_l, const PhysicalContext& ctx) {
    if (!(ctx.k10 > 0 && ctx.L0x > 0))
        throw ConfigError("parameter conversion: k10 and L0x must be > 0");
    ParameterPoint p;
    p.bi_t = std::isinf(h_t) ? h_t : h_t * ctx.L0x / ctx.k10;
    p.bi_l = 4.0 * R_l * ctx.L0x / ctx.k10;
    return p;
}

std::pair<double, double> parameters_to_physical(const ParameterPoint& p, const PhysicalContext& ctx) {
    if (!(ctx.k10 > 0 && ctx.L0x > 0))
        throw ConfigError("parameter conversion: k10 and L0x must be > 0");
    const double h_t = std::isinf(p.bi_t) ? p.bi_t : p.bi_t * ctx.k10 / ctx.L0x;
    const double R_l = p.bi_l * ctx.k10 / (4.0 * ctx.L0x);
    return {h_t, R_l};
}

}  // namespace therminv
