#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace therminv {

/// Seeded random stream with pinned value transforms.
///
/// The uniform and Gaussian transforms are implemented here instead of using
/// std::*_distribution so that a given seed produces the same draw sequence on
/// every standard library. Chains and synthetic datasets are only
/// reproducible if the transform is part of the artifact.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform on [-1, 1).
    double symmetric() { return 2.0 * uniform01() - 1.0; }

    /// Standard normal via the Marsaglia polar method.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = symmetric();
            v = symmetric();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace therminv
