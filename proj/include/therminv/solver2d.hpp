#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "therminv/material.hpp"
#include "therminv/timeseries.hpp"

namespace therminv {

enum class Material : std::uint8_t { wood_fiber = 1, insulator = 2, aluminum = 3 };

/// Cell-centered tensor-product mesh over the (x, y) section. x runs from
/// the exposed top face (x = 0) to the insulator bottom (x = L0x); y spans
/// the width with the aluminum tape strips resolved next to both lateral
/// faces along the wood-fiber extent.
struct Mesh2D {
    std::vector<double> x_faces, y_faces;      // cell boundaries, ascending
    std::vector<double> x_centers, y_centers;  // derived
    std::vector<Material> material;            // [ix * ny + iy]
    int nx = 0, ny = 0;

    double dx(int i) const { return x_faces[i + 1] - x_faces[i]; }
    double dy(int j) const { return y_faces[j + 1] - y_faces[j]; }
    Material mat(int i, int j) const { return material[static_cast<std::size_t>(i) * ny + j]; }

    /// Builds the default mesh: uniform resolution cells, tape strips
    /// resolved with tape_cells cells and geometric grading back to the bulk
    /// resolution. tape thickness 0 produces a tape-free mesh.
    static Mesh2D build(const Geometry& geometry, double resolution, int tape_cells);

    /// Mesh invariants: ascending faces, >= 3 cells across each material
    /// region's thinnest extent, material map consistent with the geometry.
    void validate(const Geometry& geometry) const;
};

/// Snapshot stack of the complete model: temperatures in degC.
struct Field2D {
    Mesh2D mesh;
    std::vector<double> times;   // s, ascending
    std::vector<double> values;  // [time][ix][iy]

    double at(std::size_t it, int ix, int iy) const {
        return values[(it * mesh.nx + ix) * static_cast<std::size_t>(mesh.ny) + iy];
    }
    std::span<double> frame(std::size_t it) {
        const std::size_t n = static_cast<std::size_t>(mesh.nx) * mesh.ny;
        return {values.data() + it * n, n};
    }
    std::span<const double> frame(std::size_t it) const {
        const std::size_t n = static_cast<std::size_t>(mesh.nx) * mesh.ny;
        return {values.data() + it * n, n};
    }

    /// Bilinear interpolation between cell centers, clamped to the first and
    /// last center outside. Sensor series from solve_complete additionally
    /// reconstruct the exposed-face value from the Robin balance; use those
    /// for surface sensors.
    double probe(double x, double y, std::size_t it) const;
};

struct ProbePoint {
    double x = 0, y = 0;
};

struct Solve2dOptions {
    double dt = 0.5;              // s
    double horizon = 72000.0;     // s
    std::vector<double> snapshot_times;  // s; field frames stored here
    std::vector<ProbePoint> probes;
    std::vector<double> probe_times;     // s, shared grid for all probes
    bool strict = false;          // escalate consistency-guard warnings
};

struct Solve2dResult {
    Field2D field;
    std::vector<TimeSeries> probe_series;  // one per probe, degC
    std::vector<std::string> warnings;
};

/// Explicit DuFort-Frankel integration of the complete nonlinear model:
/// three-level leapfrog with the diagonal term replaced by the average of
/// the new and old levels, coefficients frozen at the middle level, Robin
/// exchange on the top/bottom faces (h_t) and the lateral faces (h_l),
/// harmonic-mean conductivities across material interfaces. The first step
/// is seeded by point-implicit Euler sub-steps.
Solve2dResult solve_complete(const MaterialLayer& wood_fiber,
                             const MaterialLayer& insulator,
                             const MaterialLayer& aluminum,
                             const Geometry& geometry,
                             const BoundarySchedule& schedule,
                             double h_t, double h_l, double T_ini,
                             const ReferenceScales& scales,
                             const Mesh2D& mesh, const Solve2dOptions& options);

/// Share of x-direction flux among the total flux magnitude along the
/// sensor column: wood-fiber cells of the two columns bracketing y_column
/// with centers in [x_lo, x_hi], one value per stored frame. Gradients by
/// centered differences, k(T) local.
TimeSeries flux_ratio(const Field2D& field, double x_lo, double x_hi, double y_column,
                      const MaterialLayer& wood_fiber, const ReferenceScales& scales);

/// Mean conductive flux (W/m^2, positive toward the insulator) across the
/// wood-fiber/insulator interface per stored frame.
TimeSeries interface_flux(const Field2D& field, const Geometry& geometry,
                          const MaterialLayer& wood_fiber, const MaterialLayer& insulator,
                          const MaterialLayer& aluminum, const ReferenceScales& scales);

/// Mean aluminum-region temperature minus the chamber set-point.
TimeSeries aluminum_deviation(const Field2D& field, const BoundarySchedule& schedule);

}  // namespace therminv
