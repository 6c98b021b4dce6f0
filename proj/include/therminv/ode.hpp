#pragma once

#include <functional>
#include <span>
#include <vector>

namespace therminv {

/// Square matrix with kl sub- and ku super-diagonals, dense within the band.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), width_(kl + ku + 1),
          a_(static_cast<std::size_t>(n) * width_, 0.0) {}

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    bool in_band(int i, int j) const {
        const int d = j - i;
        return d >= -kl_ && d <= ku_;
    }

    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }

    void set_zero() { std::fill(a_.begin(), a_.end(), 0.0); }

private:
    int n_, kl_, ku_, width_;
    std::vector<double> a_;
};

/// In-place LU without pivoting. Returns false on a vanishing pivot (caller
/// reduces the step and retries; the integrator's iteration matrix tends to
/// the identity as the step shrinks).
bool banded_lu_factor(BandedMatrix& m);

/// Solves LU x = b in place using a factored matrix.
void banded_lu_solve(const BandedMatrix& lu, std::span<double> x);

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeOptions {
    double abs_tol = 1e-3;
    double rel_tol = 1e-3;
    double max_step = 0.0;   // <= 0 means unbounded
    double initial_step = 0.0;  // <= 0 means automatic
    /// Times the integrator must land on exactly (forcing kinks).
    std::vector<double> critical_times;
    int max_steps = 2'000'000;
};

/// Called for each requested output time, in order.
using OdeEmit = std::function<void(std::size_t index, double t, std::span<const double> y)>;

/// Adaptive TR-BDF2 (one-step, L-stable, embedded third-order error
/// estimate) with a banded finite-difference Jacobian and simplified Newton
/// stages. Dense output between step ends is cubic Hermite.
///
/// output_times must be ascending and inside [t0, t1]; y0 is emitted for an
/// output time equal to t0. Throws SolverError on step-size underflow,
/// Newton stagnation or non-finite states.
void integrate_trbdf2(const OdeRhs& rhs, int dim, int jac_kl, int jac_ku,
                      std::span<const double> y0, double t0, double t1,
                      std::span<const double> output_times, const OdeEmit& emit,
                      const OdeOptions& options);

}  // namespace therminv
