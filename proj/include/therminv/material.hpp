#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "therminv/timeseries.hpp"

namespace therminv {

/// Affine temperature laws k(T) = k0 + k1*T/T0 and c(T) = c0 + c1*T/T0
/// plus the layer thickness. The intercepts may be negative (wood fiber has
/// c0 < 0); only the effective values over the operating range must stay
/// positive.
struct MaterialLayer {
    double k0 = 0;         // W/m/K
    double k1 = 0;         // W/m/K
    double c0 = 0;         // W/m^3/K
    double c1 = 0;         // W/m^3/K
    double thickness = 0;  // m

    double conductivity(double T_C, double T0_C) const { return k0 + k1 * T_C / T0_C; }
    double capacity(double T_C, double T0_C) const { return c0 + c1 * T_C / T0_C; }

    /// Throws ConfigError unless thickness > 0 and both effective properties
    /// stay positive over [T_lo, T_hi].
    void validate(double T_lo_C, double T_hi_C, double T0_C, const char* name) const;
};

/// Domain box and the layer split along x. x = 0 is the exposed top face.
struct Geometry {
    double L0x = 0.16;   // m, height
    double L0y = 0.08;   // m, width
    double L0z = 0.08;   // m, depth
    std::vector<double> layer_boundaries{0.0, 0.08, 0.16};  // m along x
    double aluminum_thickness = 1e-4;  // m, lateral tape

    void validate() const;
    double interface_x() const { return layer_boundaries[1]; }
};

/// Chamber set-point program: piecewise linear between breakpoints,
/// constant outside.
class BoundarySchedule {
public:
    BoundarySchedule() = default;
    explicit BoundarySchedule(std::vector<std::pair<double, double>> breakpoints);

    /// Temperature in degC at time t (seconds).
    double temperature(double t_s) const;

    const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

    double min_temperature() const;
    double max_temperature() const;

    /// The measured chamber program: 20 degC, +2 degC/h ramp to 30 over
    /// [0, 5] h, hold to 15 h, -2 degC/h back to 20 at 20 h.
    static BoundarySchedule paper_default();

private:
    std::vector<std::pair<double, double>> points_;
};

/// Reference quantities of the dimensionless map u = T/T0, tau = t/t0,
/// chi = x/L0x.
struct ReferenceScales {
    double T0 = 20.0;     // degC
    double t0 = 72000.0;  // s
    double L0x = 0.16;    // m

    void validate() const;
};

/// Estimated pair in dimensionless form. bi_t == +inf flags the Dirichlet
/// top/bottom configuration (only bi_l is then meaningful).
struct ParameterPoint {
    double bi_t = 0;
    double bi_l = 0;

    bool dirichlet() const { return std::isinf(bi_t); }
};

/// Everything the lumped solver needs, in dimensionless form.
struct DimensionlessConfig {
    double fo1 = 0;   // wood-fiber Fourier number (sign follows c_{1,0})
    double fo2 = 0;   // insulator Fourier number
    double bi_t = 0;  // top Biot number
    double bi_l = 0;  // lateral Biot number
    double r = 0;     // L0x / L0y

    double kappa21 = 0;      // k_{2,0} / k_{1,0}
    double kappa1_slope = 0; // k_{1,1} / k_{1,0}
    double kappa2_slope = 0; // k_{2,1} / k_{2,0}
    double zeta1_slope = 0;  // c_{1,1} / c_{1,0}
    double zeta2_slope = 0;  // c_{2,1} / c_{2,0}

    double u_ini = 1.0;
    double chi_interface = 0.5;

    BoundarySchedule schedule;
    ReferenceScales scales;

    double u_inf(double tau) const {
        return schedule.temperature(tau * scales.t0) / scales.T0;
    }

    /// Copy with the estimated pair replaced; all material numbers kept.
    DimensionlessConfig with_parameters(const ParameterPoint& p) const {
        DimensionlessConfig c = *this;
        c.bi_t = p.bi_t;
        c.bi_l = p.bi_l;
        return c;
    }
};

/// kappa_i(u) = 1 + slope*u and zeta_i(u) = 1 + slope*u.
inline double affine_property(double slope, double u) { return 1.0 + slope * u; }

/// Maps the physical problem description onto DimensionlessConfig.
/// Fo_i = k_{i,0} t0 / (c_{i,0} L0x^2), Bi_t = h_t L0x / k_{1,0},
/// Bi_l = 4 R_l L0x / k_{1,0}. Throws ConfigError on degenerate scales.
DimensionlessConfig nondimensionalize(const MaterialLayer& wood_fiber,
                                      const MaterialLayer& insulator,
                                      const Geometry& geometry,
                                      const ReferenceScales& scales,
                                      double h_t, double R_l,
                                      const BoundarySchedule& schedule,
                                      double T_ini_C);

/// Conversion context between (h_t, R_l) and (Bi_t, Bi_l).
struct PhysicalContext {
    double k10 = 0;  // W/m/K
    double L0x = 0;  // m
};

ParameterPoint parameters_to_dimensionless(double h_t, double R_l, const PhysicalContext& ctx);

/// Returns (h_t, R_l); an infinite bi_t maps back to infinite h_t.
std::pair<double, double> parameters_to_physical(const ParameterPoint& p, const PhysicalContext& ctx);

}  // namespace therminv
