#pragma once

#include <span>
#include <vector>

namespace therminv {

/// A sampled scalar series over ascending times.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v;

    /// Piecewise-linear value with constant extrapolation outside [t0, tN].
    double at(double time) const;
};

/// Linear interpolation of (xs, ys) at x, constant outside the range.
/// xs must be ascending and non-empty.
double interp_linear(std::span<const double> xs, std::span<const double> ys, double x);

}  // namespace therminv
