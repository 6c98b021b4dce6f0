#include "therminv/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "therminv/errors.hpp"

namespace therminv {

bool banded_lu_factor(BandedMatrix& m) {
    const int n = m.n(), kl = m.kl(), ku = m.ku();
    for (int k = 0; k < n; ++k) {
        const double piv = m.at(k, k);
        if (std::abs(piv) < 1e-300 || !std::isfinite(piv)) return false;
        const int imax = std::min(n - 1, k + kl);
        const int jmax = std::min(n - 1, k + ku);
        for (int i = k + 1; i <= imax; ++i) {
            const double l = m.at(i, k) / piv;
            m.at(i, k) = l;
            for (int j = k + 1; j <= jmax; ++j) m.at(i, j) -= l * m.at(k, j);
        }
    }
    return true;
}

void banded_lu_solve(const BandedMatrix& lu, std::span<double> x) {
    const int n = lu.n(), kl = lu.kl(), ku = lu.ku();
    for (int i = 0; i < n; ++i) {
        const int j0 = std::max(0, i - kl);
        double s = x[i];
        for (int j = j0; j < i; ++j) s -= lu.at(i, j) * x[j];
        x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        const int j1 = std::min(n - 1, i + ku);
        double s = x[i];
        for (int j = i + 1; j <= j1; ++j) s -= lu.at(i, j) * x[j];
        x[i] = s / lu.at(i, i);
    }
}

namespace {

// TR-BDF2 with gamma = 2 - sqrt(2). Both implicit stages share the
// iteration matrix I - (gamma*h/2) J.
constexpr double kGamma = 0.585786437626904951;        // 2 - sqrt(2)
constexpr double kC1 = 1.207106781186547524;           // (sqrt(2)+1)/2
constexpr double kC0 = 0.207106781186547524;           // (sqrt(2)-1)/2
// Third-order quadrature weights on nodes {0, gamma, 1} of the step.
constexpr double kW0 = 0.215482203135649750;           // (4-sqrt(2))/12
constexpr double kW1 = 0.686886723008154188;           // (3*sqrt(2)+4)/12
constexpr double kW2 = 0.097631073856196062;           // (2-sqrt(2))/6

class Stepper {
public:
    Stepper(const OdeRhs& rhs, int dim, int kl, int ku, const OdeOptions& opt)
        : rhs_(rhs), n_(dim), kl_(kl), ku_(ku), opt_(opt), jac_(dim, kl, ku),
          iter_(dim, kl, ku) {
        y_.resize(n_);
        f0_.resize(n_);
        f2_.resize(n_);
        ys_.resize(n_);
        scratch_.assign(6 * n_, 0.0);
    }

    void run(std::span<const double> y0, double t0, double t1,
             std::span<const double> output_times, const OdeEmit& emit);

private:
    void eval(double t, std::span<const double> y, std::span<double> dydt) {
        rhs_(t, y, dydt);
    }

    void build_iteration_matrix(double t, std::span<const double> y,
                                std::span<const double> f, double h);
    bool newton_solve(double t_stage, double coef_h, std::span<const double> rhs_const,
                      std::span<double> x);
    double error_norm(std::span<const double> est, std::span<const double> y_old,
                      std::span<const double> y_new) const;

    const OdeRhs& rhs_;
    int n_, kl_, ku_;
    OdeOptions opt_;
    BandedMatrix jac_, iter_;
    std::vector<double> y_, f0_, f2_, ys_, scratch_;
};

void Stepper::build_iteration_matrix(double t, std::span<const double> y,
                                     std::span<const double> f, double h) {
    // Banded finite-difference Jacobian by column groups spaced kl+ku+1 apart.
    const int groups = kl_ + ku_ + 1;
    std::span<double> yp(scratch_.data(), n_);
    std::span<double> fp(scratch_.data() + n_, n_);
    jac_.set_zero();
    const double sqeps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (int g = 0; g < groups; ++g) {
        std::copy(y.begin(), y.end(), yp.begin());
        for (int j = g; j < n_; j += groups)
            yp[j] += sqeps * std::max(std::abs(y[j]), 1e-5);
        eval(t, yp, fp);
        for (int j = g; j < n_; j += groups) {
            const double d = yp[j] - y[j];
            const int i0 = std::max(0, j - ku_);
            const int i1 = std::min(n_ - 1, j + kl_);
            for (int i = i0; i <= i1; ++i) jac_.at(i, j) = (fp[i] - f[i]) / d;
        }
    }
    // iter = I - (gamma*h/2) J
    const double a = 0.5 * kGamma * h;
    iter_ = jac_;
    for (int i = 0; i < n_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(n_ - 1, i + ku_);
        for (int j = j0; j <= j1; ++j) iter_.at(i, j) = -a * iter_.at(i, j);
        iter_.at(i, i) += 1.0;
    }
}

// Solves x = rhs_const + coef_h * f(t_stage, x) by simplified Newton with the
// shared factored matrix. Returns false when the iteration fails to contract.
bool Stepper::newton_solve(double t_stage, double coef_h, std::span<const double> rhs_const,
                           std::span<double> x) {
    std::span<double> fx(scratch_.data() + 2 * n_, n_);
    std::span<double> res(scratch_.data() + 3 * n_, n_);
    double prev_norm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 8; ++it) {
        eval(t_stage, x, fx);
        double norm = 0.0;
        for (int i = 0; i < n_; ++i) {
            res[i] = rhs_const[i] + coef_h * fx[i] - x[i];
            const double w = opt_.abs_tol + opt_.rel_tol * std::abs(x[i]);
            norm += (res[i] / w) * (res[i] / w);
        }
        norm = std::sqrt(norm / n_);
        if (!std::isfinite(norm)) return false;
        if (norm < 0.03) {
            banded_lu_solve(iter_, res);
            for (int i = 0; i < n_; ++i) x[i] += res[i];
            return true;
        }
        if (it > 1 && norm > 0.9 * prev_norm) return false;
        prev_norm = norm;
        banded_lu_solve(iter_, res);
        for (int i = 0; i < n_; ++i) x[i] += res[i];
    }
    return false;
}

double Stepper::error_norm(std::span<const double> est, std::span<const double> y_old,
                           std::span<const double> y_new) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double w = opt_.abs_tol +
                         opt_.rel_tol * std::max(std::abs(y_old[i]), std::abs(y_new[i]));
        s += (est[i] / w) * (est[i] / w);
    }
    return std::sqrt(s / n_);
}

void Stepper::run(std::span<const double> y0, double t0, double t1,
                  std::span<const double> output_times, const OdeEmit& emit) {
    const double span = t1 - t0;
    if (!(span > 0)) throw SolverError("integration span must be positive", t0);

    std::copy(y0.begin(), y0.end(), y_.begin());
    double t = t0;

    std::size_t next_out = 0;
    while (next_out < output_times.size() && output_times[next_out] <= t0) {
        emit(next_out, t0, y_);
        ++next_out;
    }

    std::vector<double> stops(opt_.critical_times.begin(), opt_.critical_times.end());
    stops.push_back(t1);
    std::sort(stops.begin(), stops.end());
    std::size_t next_stop = 0;
    auto advance_stop = [&] {
        while (next_stop < stops.size() && stops[next_stop] <= t + 1e-14 * span) ++next_stop;
    };
    advance_stop();

    eval(t, y_, f0_);

    double h = opt_.initial_step > 0 ? opt_.initial_step : 1e-3 * span;
    if (opt_.max_step > 0) h = std::min(h, opt_.max_step);

    std::span<double> rhs_const(scratch_.data() + 4 * n_, n_);
    std::span<double> est(scratch_.data() + 5 * n_, n_);
    std::vector<double> y_new(n_), f1(n_);

    const double h_min = 1e-13 * span;
    int n_steps = 0;

    while (t < t1 - 1e-14 * span) {
        if (++n_steps > opt_.max_steps)
            throw SolverError("step budget exhausted", t);
        if (h < h_min) throw SolverError("step size underflow", t);
        if (opt_.max_step > 0) h = std::min(h, opt_.max_step);
        // Land exactly on the next forcing kink / horizon.
        if (next_stop < stops.size()) {
            const double gap = stops[next_stop] - t;
            if (h >= gap)
                h = gap;
            else if (h > 0.5 * gap)
                h = 0.5 * gap;  // avoid leaving a sliver step
        }

        build_iteration_matrix(t, y_, f0_, h);
        if (!banded_lu_factor(iter_)) {
            h *= 0.3;
            continue;
        }

        // Trapezoidal stage to t + gamma*h.
        const double a = 0.5 * kGamma * h;
        for (int i = 0; i < n_; ++i) {
            rhs_const[i] = y_[i] + a * f0_[i];
            ys_[i] = y_[i] + kGamma * h * f0_[i];  // predictor
        }
        if (!newton_solve(t + kGamma * h, a, rhs_const, ys_)) {
            h *= 0.3;
            continue;
        }

        // BDF2 stage to t + h.
        for (int i = 0; i < n_; ++i) {
            rhs_const[i] = kC1 * ys_[i] - kC0 * y_[i];
            y_new[i] = ys_[i];  // predictor
        }
        if (!newton_solve(t + h, a, rhs_const, y_new)) {
            h *= 0.3;
            continue;
        }

        // Embedded third-order companion from the three stage derivatives.
        // f1 is recovered from the trapezoidal stage identity.
        for (int i = 0; i < n_; ++i) f1[i] = (ys_[i] - y_[i]) * (2.0 / (kGamma * h)) - f0_[i];
        eval(t + h, y_new, f2_);
        for (int i = 0; i < n_; ++i)
            est[i] = y_[i] + h * (kW0 * f0_[i] + kW1 * f1[i] + kW2 * f2_[i]) - y_new[i];
        // Stiffness filter: pass the estimate through the iteration matrix.
        banded_lu_solve(iter_, est);

        const double err = error_norm(est, y_, y_new);
        if (!std::isfinite(err)) {
            h *= 0.3;
            continue;
        }
        if (err > 1.0) {
            h *= std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 0.9);
            continue;
        }

        // Accepted: emit dense output on (t, t+h] by cubic Hermite.
        const double t_new = t + h;
        while (next_out < output_times.size() && output_times[next_out] <= t_new + 1e-14 * span) {
            const double s = std::clamp((output_times[next_out] - t) / h, 0.0, 1.0);
            const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
            const double h10 = s * (1 - s) * (1 - s);
            const double h01 = s * s * (3 - 2 * s);
            const double h11 = s * s * (s - 1);
            for (int i = 0; i < n_; ++i)
                est[i] = h00 * y_[i] + h10 * h * f0_[i] + h01 * y_new[i] + h11 * h * f2_[i];
            emit(next_out, output_times[next_out], est);
            ++next_out;
        }

        t = t_new;
        std::swap(y_, y_new);
        std::swap(f0_, f2_);
        advance_stop();
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0), 0.2, 5.0);
    }

    while (next_out < output_times.size()) {
        emit(next_out, t1, y_);
        ++next_out;
    }
}

}  // namespace

void integrate_trbdf2(const OdeRhs& rhs, int dim, int jac_kl, int jac_ku,
                      std::span<const double> y0, double t0, double t1,
                      std::span<const double> output_times, const OdeEmit& emit,
                      const OdeOptions& options) {
    if (static_cast<int>(y0.size()) != dim)
        throw SolverError("state size mismatch", t0);
    Stepper stepper(rhs, dim, jac_kl, jac_ku, options);
    stepper.run(y0, t0, t1, output_times, emit);
}

}  // namespace therminv
