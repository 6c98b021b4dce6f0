#include "therminv/timeseries.hpp"

#include <algorithm>
#include <cassert>

namespace therminv {

double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) {
    assert(!xs.empty() && xs.size() == ys.size());
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

double TimeSeries::at(double time) const {
    return interp_linear(t, v, time);
}

}  // namespace therminv
