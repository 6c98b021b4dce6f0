#pragma once

#include <span>
#include <utility>
#include <vector>

#include "therminv/field1d.hpp"
#include "therminv/material.hpp"
#include "therminv/solver1d.hpp"
#include "therminv/timeseries.hpp"

namespace therminv {

/// Parameter sensitivities of the lumped field: theta = du/dBi_t,
/// psi = du/dBi_l, phi = du/dFo_1. Same mesh and times as the forward field,
/// zero initial conditions.
struct SensitivityFields {
    Field1D theta;
    Field1D psi;
    Field1D phi;
};

/// Solves the forward problem and the three sensitivity fields as one
/// coupled system (the sensitivity equations are exact directional
/// derivatives of the forward discretization).
std::pair<Field1D, SensitivityFields> solve_sensitivities(
    const DimensionlessConfig& cfg, const ParameterPoint& p, const Mesh1D& mesh,
    const SolverControls& controls, std::span<const double> output_times);

/// Symmetric 2x2 information matrix of (Bi_t, Bi_l).
struct FisherMatrix {
    double f11 = 0;
    double f12 = 0;
    double f22 = 0;
};

/// F_ab = sum_j integral s_a s_b / sigma^2 dt with s1 = theta, s2 = psi.
/// sigma_C is one series per sensor in degC on its own time grid; it is
/// interpolated to the sensitivity output times and divided by T0. The time
/// integral is a trapezoid over the output grid in seconds.
/// Throws DomainError when any interpolated sigma is <= 0.
FisherMatrix fisher_matrix(const SensitivityFields& sens,
                           std::span<const double> sensor_chis,
                           std::span<const TimeSeries> sigma_C,
                           const ReferenceScales& scales);

/// Error indicators eta = sqrt(1/F_aa); throws DomainError when a diagonal
/// vanishes (unidentifiable parameter).
std::pair<double, double> error_indicators(const FisherMatrix& f);

/// Pearson correlation of two equally sized stacked series.
/// Throws DomainError on size mismatch, length < 2 or zero variance.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace therminv
