#pragma once

#include <span>

#include "therminv/field1d.hpp"
#include "therminv/material.hpp"

namespace therminv {

/// Adaptive time-integration contract of the lumped solver.
struct SolverControls {
    double abs_tol = 1e-3;
    double rel_tol = 1e-3;
    double max_step = 0.05;  // dimensionless

    void validate() const;
};

/// Discrete du/dtau of the lumped two-layer problem (Robin form) for all
/// nodes: second-order central stencils, half-cell Robin closures, shared
/// interface node with two-sided flux balance. Throws SolverError when the
/// effective capacity leaves its validity range.
void assemble_rhs(std::span<const double> u_nodes, double tau,
                  const DimensionlessConfig& cfg, const ParameterPoint& p,
                  const Mesh1D& mesh, std::span<double> dudt);

/// Integrates the lumped problem from tau = 0 to max(output_times) and
/// returns the field sampled at output_times (ascending, within [0, 1]).
/// u(., 0) = u_ini exactly. A ParameterPoint with bi_t = inf selects the
/// Dirichlet configuration (u = u_inf at both ends).
Field1D solve_lumped(const DimensionlessConfig& cfg, const ParameterPoint& p,
                     const Mesh1D& mesh, const SolverControls& controls,
                     std::span<const double> output_times);

}  // namespace therminv
