#include "therminv/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "therminv/errors.hpp"

namespace therminv {

namespace {

// Appends cell faces from `from` to `to`: tape_cells uniform cells over the
// tape strip when entering from a tape edge, otherwise geometric growth from
// `start_size` to `resolution`, then uniform fill.
void grade_segment(std::vector<double>& faces, double from, double to,
                   double start_size, double resolution) {
    double pos = from;
    double size = start_size;
    const double span = to - from;
    std::vector<double> local;
    while (size < resolution && pos + 2.0 * size < to - 0.25 * span) {
        pos += size;
        local.push_back(pos);
        size *= 1.6;
    }
    const double rest = to - pos;
    const int n_uniform = std::max(1, static_cast<int>(std::ceil(rest / resolution)));
    for (int k = 1; k < n_uniform; ++k) local.push_back(pos + rest * k / n_uniform);
    local.push_back(to);
    faces.insert(faces.end(), local.begin(), local.end());
}

}  // namespace

Mesh2D Mesh2D::build(const Geometry& geometry, double resolution, int tape_cells) {
    geometry.validate();
    if (!(resolution > 0)) throw ConfigError("mesh2d: resolution must be > 0");
    if (tape_cells < 3 && geometry.aluminum_thickness > 0)
        throw ConfigError("mesh2d: tape must be resolved with >= 3 cells");

    Mesh2D m;
    const double xi = geometry.interface_x();
    const double tape = geometry.aluminum_thickness;

    // x: uniform cells inside each layer, a face exactly on the interface.
    m.x_faces.push_back(0.0);
    const int n1 = std::max(3, static_cast<int>(std::ceil(xi / resolution)));
    for (int k = 1; k <= n1; ++k) m.x_faces.push_back(xi * k / n1);
    const int n2 = std::max(3, static_cast<int>(std::ceil((geometry.L0x - xi) / resolution)));
    for (int k = 1; k <= n2; ++k) m.x_faces.push_back(xi + (geometry.L0x - xi) * k / n2);

    // y: symmetric; tape strips resolved then graded toward the bulk.
    m.y_faces.push_back(0.0);
    const double y_mid = 0.5 * geometry.L0y;
    if (tape > 0) {
        for (int k = 1; k <= tape_cells; ++k) m.y_faces.push_back(tape * k / tape_cells);
        grade_segment(m.y_faces, tape, y_mid, tape / tape_cells, resolution);
    } else {
        grade_segment(m.y_faces, 0.0, y_mid, resolution, resolution);
    }
    // Mirror the lower half about the mid-plane.
    const std::size_t half = m.y_faces.size();
    for (std::size_t k = half - 1; k-- > 0;)
        m.y_faces.push_back(geometry.L0y - m.y_faces[k]);

    m.nx = static_cast<int>(m.x_faces.size()) - 1;
    m.ny = static_cast<int>(m.y_faces.size()) - 1;
    m.x_centers.resize(m.nx);
    m.y_centers.resize(m.ny);
    for (int i = 0; i < m.nx; ++i) m.x_centers[i] = 0.5 * (m.x_faces[i] + m.x_faces[i + 1]);
    for (int j = 0; j < m.ny; ++j) m.y_centers[j] = 0.5 * (m.y_faces[j] + m.y_faces[j + 1]);

    // The tape runs down the full lateral boundary: the lateral Robin
    // condition carries the aluminum conductivity over the whole height, so
    // the strips span both layers.
    m.material.resize(static_cast<std::size_t>(m.nx) * m.ny);
    for (int i = 0; i < m.nx; ++i) {
        for (int j = 0; j < m.ny; ++j) {
            Material mat;
            if (tape > 0 && (m.y_centers[j] < tape || m.y_centers[j] > geometry.L0y - tape)) {
                mat = Material::aluminum;
            } else if (m.x_centers[i] > xi) {
                mat = Material::insulator;
            } else {
                mat = Material::wood_fiber;
            }
            m.material[static_cast<std::size_t>(i) * m.ny + j] = mat;
        }
    }
    m.validate(geometry);
    return m;
}

void Mesh2D::validate(const Geometry& geometry) const {
    auto check_ascending = [](const std::vector<double>& f, const char* axis) {
        for (std::size_t k = 1; k < f.size(); ++k)
            if (!(f[k] > f[k - 1]))
                throw ConfigError(std::string("mesh2d: ") + axis + " faces not ascending");
    };
    check_ascending(x_faces, "x");
    check_ascending(y_faces, "y");
    if (nx < 3 || ny < 3) throw ConfigError("mesh2d: too few cells");

    // >= 3 cells across each material region's thinnest dimension.
    const double tape = geometry.aluminum_thickness;
    if (tape > 0) {
        int strip = 0;
        for (int j = 0; j < ny; ++j)
            if (y_centers[j] < tape) ++strip;
        if (strip < 3) throw ConfigError("mesh2d: aluminum tape resolved with < 3 cells");
    }
    int wood_rows = 0, ins_rows = 0;
    for (int i = 0; i < nx; ++i) {
        if (x_centers[i] < geometry.interface_x()) ++wood_rows;
        else ++ins_rows;
    }
    if (wood_rows < 3 || ins_rows < 3)
        throw ConfigError("mesh2d: layers resolved with < 3 cells across thickness");
}

double Field2D::probe(double x, double y, std::size_t it) const {
    const auto& xc = mesh.x_centers;
    const auto& yc = mesh.y_centers;
    int j0 = 0;
    while (j0 + 1 < mesh.ny && yc[j0 + 1] < y) ++j0;
    const int j1 = std::min(j0 + 1, mesh.ny - 1);
    const double wy = (j1 > j0 && y > yc[j0])
                          ? std::min(1.0, (y - yc[j0]) / (yc[j1] - yc[j0]))
                          : 0.0;
    auto col = [&](int ix) { return at(it, ix, j0) * (1 - wy) + at(it, ix, j1) * wy; };

    if (x <= xc.front()) return col(0);
    if (x >= xc.back()) return col(mesh.nx - 1);
    int i0 = 0;
    while (i0 + 1 < mesh.nx && xc[i0 + 1] < x) ++i0;
    const double wx = (x - xc[i0]) / (xc[i0 + 1] - xc[i0]);
    return col(i0) * (1 - wx) + col(i0 + 1) * wx;
}

namespace {

struct Coefs {
    // Per-cell conductivity and capacity at the frozen level.
    std::vector<double> k, c;
    // Face conductances, per unit depth: gx has (nx+1)*ny entries, gy has
    // nx*(ny+1). Boundary entries hold the Robin film+half-cell conductance.
    std::vector<double> gx, gy;
};

class Engine {
public:
    Engine(const MaterialLayer& wood, const MaterialLayer& ins, const MaterialLayer& alu,
           const Geometry& geo, const BoundarySchedule& schedule, double h_t, double h_l,
           double T_ini, const ReferenceScales& scales, const Mesh2D& mesh,
           const Solve2dOptions& opt)
        : wood_(wood), ins_(ins), alu_(alu), geo_(geo), schedule_(schedule), h_t_(h_t),
          h_l_(h_l), T_ini_(T_ini), scales_(scales), mesh_(mesh), opt_(opt) {
        nx_ = mesh.nx;
        ny_ = mesh.ny;
        n_ = static_cast<std::size_t>(nx_) * ny_;
        vol_.resize(n_);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) vol_[idx(i, j)] = mesh.dx(i) * mesh.dy(j);
        co_.k.resize(n_);
        co_.c.resize(n_);
        co_.gx.assign(static_cast<std::size_t>(nx_ + 1) * ny_, 0.0);
        co_.gy.assign(static_cast<std::size_t>(nx_) * (ny_ + 1), 0.0);
    }

    Solve2dResult run();

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * ny_ + j; }

    const MaterialLayer& layer(Material m) const {
        switch (m) {
            case Material::wood_fiber: return wood_;
            case Material::insulator: return ins_;
            default: return alu_;
        }
    }

    void consistency_guard(std::vector<std::string>& warnings) const;
    void update_coefficients(const std::vector<double>& T);
    void point_implicit_step(std::vector<double>& T, double dt_sub, double T_inf);
    double probe_value(const std::vector<double>& T, const ProbePoint& p, double T_inf) const;

    const MaterialLayer &wood_, &ins_, &alu_;
    const Geometry& geo_;
    const BoundarySchedule& schedule_;
    double h_t_, h_l_, T_ini_;
    const ReferenceScales& scales_;
    const Mesh2D& mesh_;
    const Solve2dOptions& opt_;

    int nx_ = 0, ny_ = 0;
    std::size_t n_ = 0;
    std::vector<double> vol_;
    Coefs co_;
};

void Engine::consistency_guard(std::vector<std::string>& warnings) const {
    const double T_lo = std::min(T_ini_, schedule_.min_temperature());
    const double T_hi = std::max(T_ini_, schedule_.max_temperature());
    struct Region {
        Material mat;
        const char* name;
        double thin_extent;
    };
    const double tape = geo_.aluminum_thickness;
    const Region regions[] = {
        {Material::wood_fiber, "wood_fiber",
         std::min(geo_.interface_x(), geo_.L0y - 2 * tape)},
        {Material::insulator, "insulator",
         std::min(geo_.L0x - geo_.interface_x(), geo_.L0y - 2 * tape)},
        {Material::aluminum, "aluminum", tape},
    };
    for (const auto& rg : regions) {
        double dmin = std::numeric_limits<double>::infinity();
        bool present = false;
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j)
                if (mesh_.mat(i, j) == rg.mat) {
                    present = true;
                    dmin = std::min({dmin, mesh_.dx(i), mesh_.dy(j)});
                }
        if (!present) continue;
        const auto& lay = layer(rg.mat);
        double alpha = 0;
        for (double T : {T_lo, T_hi})
            alpha = std::max(alpha, lay.conductivity(T, scales_.T0) / lay.capacity(T, scales_.T0));
        // A layer that equilibrates across its own thickness within one step
        // behaves quasi-steadily; the three-level artifact term cannot
        // accumulate there and the metric below would be meaningless.
        if (rg.thin_extent * rg.thin_extent / alpha <= opt_.dt) continue;
        const double metric = std::pow(opt_.dt / dmin * alpha, 2.0);
        if (metric >= 1e-3) {
            warnings.push_back(std::string("consistency guard exceeded in ") + rg.name +
                               ": (dt/dx * alpha)^2 = " + std::to_string(metric) +
                               " >= 1e-3; reduce dt or coarsen the region");
        }
    }
}

void Engine::update_coefficients(const std::vector<double>& T) {
    const double T0 = scales_.T0;
    for (std::size_t q = 0; q < n_; ++q) {
        const MaterialLayer& lay = layer(mesh_.material[q]);
        co_.k[q] = lay.k0 + lay.k1 * T[q] / T0;
        co_.c[q] = lay.c0 + lay.c1 * T[q] / T0;
    }
    // Interior x-faces
    for (int i = 1; i < nx_; ++i) {
        const double dl = 0.5 * mesh_.dx(i - 1), dr = 0.5 * mesh_.dx(i);
        for (int j = 0; j < ny_; ++j) {
            const std::size_t qa = idx(i - 1, j), qb = idx(i, j);
            const double w = mesh_.dy(j);
            double g;
            if (mesh_.material[qa] == mesh_.material[qb]) {
                g = w * 0.5 * (co_.k[qa] + co_.k[qb]) / (dl + dr);
            } else {
                g = w / (dl / co_.k[qa] + dr / co_.k[qb]);
            }
            co_.gx[static_cast<std::size_t>(i) * ny_ + j] = g;
        }
    }
    // Interior y-faces
    for (int i = 0; i < nx_; ++i) {
        for (int j = 1; j < ny_; ++j) {
            const std::size_t qa = idx(i, j - 1), qb = idx(i, j);
            const double dl = 0.5 * mesh_.dy(j - 1), dr = 0.5 * mesh_.dy(j);
            const double w = mesh_.dx(i);
            double g;
            if (mesh_.material[qa] == mesh_.material[qb]) {
                g = w * 0.5 * (co_.k[qa] + co_.k[qb]) / (dl + dr);
            } else {
                g = w / (dl / co_.k[qa] + dr / co_.k[qb]);
            }
            co_.gy[static_cast<std::size_t>(i) * (ny_ + 1) + j] = g;
        }
    }
    // Robin boundary faces: half-cell conduction in series with the film.
    for (int j = 0; j < ny_; ++j) {
        const double w = mesh_.dy(j);
        const std::size_t qt = idx(0, j), qb = idx(nx_ - 1, j);
        co_.gx[j] = h_t_ > 0 ? w / (0.5 * mesh_.dx(0) / co_.k[qt] + 1.0 / h_t_) : 0.0;
        co_.gx[static_cast<std::size_t>(nx_) * ny_ + j] =
            h_t_ > 0 ? w / (0.5 * mesh_.dx(nx_ - 1) / co_.k[qb] + 1.0 / h_t_) : 0.0;
    }
    for (int i = 0; i < nx_; ++i) {
        const double w = mesh_.dx(i);
        const std::size_t ql = idx(i, 0), qr = idx(i, ny_ - 1);
        co_.gy[static_cast<std::size_t>(i) * (ny_ + 1)] =
            h_l_ > 0 ? w / (0.5 * mesh_.dy(0) / co_.k[ql] + 1.0 / h_l_) : 0.0;
        co_.gy[static_cast<std::size_t>(i) * (ny_ + 1) + ny_] =
            h_l_ > 0 ? w / (0.5 * mesh_.dy(ny_ - 1) / co_.k[qr] + 1.0 / h_l_) : 0.0;
    }
}

void Engine::point_implicit_step(std::vector<double>& T, double dt_sub, double T_inf) {
    update_coefficients(T);
    std::vector<double> Tn(T.size());
    for (int i = 0; i < nx_; ++i) {
        for (int j = 0; j < ny_; ++j) {
            const std::size_t q = idx(i, j);
            const double gW = co_.gx[static_cast<std::size_t>(i) * ny_ + j];
            const double gE = co_.gx[static_cast<std::size_t>(i + 1) * ny_ + j];
            const double gS = co_.gy[static_cast<std::size_t>(i) * (ny_ + 1) + j];
            const double gN = co_.gy[static_cast<std::size_t>(i) * (ny_ + 1) + j + 1];
            const double TW = i > 0 ? T[idx(i - 1, j)] : T_inf;
            const double TE = i + 1 < nx_ ? T[idx(i + 1, j)] : T_inf;
            const double TS = j > 0 ? T[idx(i, j - 1)] : T_inf;
            const double TN = j + 1 < ny_ ? T[idx(i, j + 1)] : T_inf;
            const double S = gW * TW + gE * TE + gS * TS + gN * TN;
            const double D = gW + gE + gS + gN;
            const double C = co_.c[q] * vol_[q] / dt_sub;
            Tn[q] = (C * T[q] + S) / (C + D);
        }
    }
    T = std::move(Tn);
}

double Engine::probe_value(const std::vector<double>& T, const ProbePoint& p, double T_inf) const {
    const auto& xc = mesh_.x_centers;
    const auto& yc = mesh_.y_centers;
    int j0 = 0;
    while (j0 + 1 < ny_ && yc[j0 + 1] < p.y) ++j0;
    const int j1 = std::min(j0 + 1, ny_ - 1);
    const double wy = (j1 > j0 && p.y > yc[j0])
                          ? std::min(1.0, (p.y - yc[j0]) / (yc[j1] - yc[j0]))
                          : 0.0;
    auto col = [&](int ix) { return T[idx(ix, j0)] * (1 - wy) + T[idx(ix, j1)] * wy; };

    if (p.x <= 1e-12) {
        // Exposed-face temperature from the Robin balance at x = 0.
        const double Tc = col(0);
        if (h_t_ <= 0) return Tc;
        const std::size_t q = idx(0, j0);
        const double k = co_.k[q];
        const double a = k / (0.5 * mesh_.dx(0));
        return (a * Tc + h_t_ * T_inf) / (a + h_t_);
    }
    if (p.x <= xc.front()) return col(0);
    if (p.x >= xc.back()) return col(nx_ - 1);
    int i0 = 0;
    while (i0 + 1 < nx_ && xc[i0 + 1] < p.x) ++i0;
    const double wx = (p.x - xc[i0]) / (xc[i0 + 1] - xc[i0]);
    return col(i0) * (1 - wx) + col(i0 + 1) * wx;
}

Solve2dResult Engine::run() {
    if (!(opt_.dt > 0)) throw ConfigError("solve_complete: dt must be > 0");
    if (!(opt_.horizon > 0)) throw ConfigError("solve_complete: horizon must be > 0");
    if (h_t_ < 0 || h_l_ < 0) throw ConfigError("solve_complete: exchange coefficients must be >= 0");

    Solve2dResult result;
    consistency_guard(result.warnings);
    if (opt_.strict && !result.warnings.empty())
        throw ConfigError("solve_complete (strict): " + result.warnings.front());

    result.field.mesh = mesh_;
    result.field.times = opt_.snapshot_times;
    result.field.values.assign(opt_.snapshot_times.size() * n_, 0.0);
    result.probe_series.assign(opt_.probes.size(), TimeSeries{});
    for (auto& ps : result.probe_series) {
        ps.t = opt_.probe_times;
        ps.v.assign(opt_.probe_times.size(), 0.0);
    }

    std::vector<double> T_old(n_, T_ini_), T_mid(n_, T_ini_), T_new(n_, T_ini_);

    const long n_steps = std::lround(std::ceil(opt_.horizon / opt_.dt - 1e-9));
    const double dt = opt_.horizon / static_cast<double>(n_steps);

    std::size_t next_snap = 0, next_probe = 0;
    std::vector<double> probe_prev(opt_.probes.size(), 0.0), probe_cur(opt_.probes.size(), 0.0);
    for (std::size_t p = 0; p < opt_.probes.size(); ++p) {
        update_coefficients(T_old);
        probe_cur[p] = probe_value(T_old, opt_.probes[p], schedule_.temperature(0.0));
    }

    auto emit_between = [&](double t_prev, double t_cur, const std::vector<double>& Tp,
                            const std::vector<double>& Tc) {
        while (next_snap < opt_.snapshot_times.size() &&
               opt_.snapshot_times[next_snap] <= t_cur + 1e-9) {
            const double ts = opt_.snapshot_times[next_snap];
            const double w = t_cur > t_prev ? std::clamp((ts - t_prev) / (t_cur - t_prev), 0.0, 1.0) : 1.0;
            auto frame = result.field.frame(next_snap);
            for (std::size_t q = 0; q < n_; ++q) frame[q] = Tp[q] + w * (Tc[q] - Tp[q]);
            ++next_snap;
        }
        while (next_probe < opt_.probe_times.size() &&
               opt_.probe_times[next_probe] <= t_cur + 1e-9) {
            const double ts = opt_.probe_times[next_probe];
            const double w = t_cur > t_prev ? std::clamp((ts - t_prev) / (t_cur - t_prev), 0.0, 1.0) : 1.0;
            for (std::size_t p = 0; p < opt_.probes.size(); ++p)
                result.probe_series[p].v[next_probe] =
                    probe_prev[p] + w * (probe_cur[p] - probe_prev[p]);
            ++next_probe;
        }
    };

    emit_between(0.0, 0.0, T_old, T_old);  // t = 0 outputs

    // Bootstrap: point-implicit Euler sub-steps over the first interval.
    {
        T_mid = T_old;
        const int nsub = 10;
        for (int s = 0; s < nsub; ++s) {
            const double t_sub = dt * s / nsub;
            point_implicit_step(T_mid, dt / nsub, schedule_.temperature(t_sub));
        }
        probe_prev = probe_cur;
        update_coefficients(T_mid);
        for (std::size_t p = 0; p < opt_.probes.size(); ++p)
            probe_cur[p] = probe_value(T_mid, opt_.probes[p], schedule_.temperature(dt));
        emit_between(0.0, dt, T_old, T_mid);
    }

    // Three-level DuFort-Frankel sweep.
    for (long step = 1; step < n_steps; ++step) {
        const double t_mid = dt * static_cast<double>(step);
        const double t_new = dt * static_cast<double>(step + 1);
        const double T_inf = schedule_.temperature(t_mid);
        update_coefficients(T_mid);

        for (int i = 0; i < nx_; ++i) {
            const double* gxw = co_.gx.data() + static_cast<std::size_t>(i) * ny_;
            const double* gxe = co_.gx.data() + static_cast<std::size_t>(i + 1) * ny_;
            const double* gys = co_.gy.data() + static_cast<std::size_t>(i) * (ny_ + 1);
            for (int j = 0; j < ny_; ++j) {
                const std::size_t q = idx(i, j);
                const double gW = gxw[j], gE = gxe[j], gS = gys[j], gN = gys[j + 1];
                const double TW = i > 0 ? T_mid[q - ny_] : T_inf;
                const double TE = i + 1 < nx_ ? T_mid[q + ny_] : T_inf;
                const double TS = j > 0 ? T_mid[q - 1] : T_inf;
                const double TN = j + 1 < ny_ ? T_mid[q + 1] : T_inf;
                const double S = gW * TW + gE * TE + gS * TS + gN * TN;
                const double D = gW + gE + gS + gN;
                const double C = co_.c[q] * vol_[q] / (2.0 * dt);
                T_new[q] = ((C - 0.5 * D) * T_old[q] + S) / (C + 0.5 * D);
            }
        }

        if ((step & 255) == 0 || step == n_steps - 1) {
            for (std::size_t q = 0; q < n_; q += 97)
                if (!std::isfinite(T_new[q]))
                    throw SolverError("solve_complete: divergence at step " + std::to_string(step),
                                      t_new);
        }

        probe_prev = probe_cur;
        for (std::size_t p = 0; p < opt_.probes.size(); ++p)
            probe_cur[p] = probe_value(T_new, opt_.probes[p], schedule_.temperature(t_new));
        emit_between(t_mid, t_new, T_mid, T_new);

        std::swap(T_old, T_mid);
        std::swap(T_mid, T_new);
    }

    // Anything at or beyond the horizon gets the final level.
    emit_between(opt_.horizon, opt_.horizon + 1.0, T_mid, T_mid);
    return result;
}

}  // namespace

Solve2dResult solve_complete(const MaterialLayer& wood_fiber,
                             const MaterialLayer& insulator,
                             const MaterialLayer& aluminum,
                             const Geometry& geometry,
                             const BoundarySchedule& schedule,
                             double h_t, double h_l, double T_ini,
                             const ReferenceScales& scales,
                             const Mesh2D& mesh, const Solve2dOptions& options) {
    Engine engine(wood_fiber, insulator, aluminum, geometry, schedule, h_t, h_l, T_ini,
                  scales, mesh, options);
    return engine.run();
}

TimeSeries flux_ratio(const Field2D& field, double x_lo, double x_hi, double y_column,
                      const MaterialLayer& wood_fiber, const ReferenceScales& scales) {
    const Mesh2D& m = field.mesh;
    // The two cell columns bracketing the sensor line (its y coordinate sits
    // on a face of the symmetric mesh).
    int jlo = 0;
    for (int j = 0; j + 1 < m.ny; ++j)
        if (m.y_centers[j] < y_column) jlo = j;
    const int cols[2] = {std::max(1, jlo), std::min(m.ny - 2, jlo + 1)};

    TimeSeries out;
    out.t = field.times;
    out.v.assign(field.times.size(), 0.0);
    for (std::size_t it = 0; it < field.times.size(); ++it) {
        double ax = 0, ay = 0;
        for (int j : cols) {
            for (int i = 1; i + 1 < m.nx; ++i) {
                if (m.x_centers[i] < x_lo || m.x_centers[i] > x_hi) continue;
                if (m.mat(i, j) != Material::wood_fiber) continue;
                const double k = wood_fiber.conductivity(field.at(it, i, j), scales.T0);
                const double jx = -k * (field.at(it, i + 1, j) - field.at(it, i - 1, j)) /
                                  (m.x_centers[i + 1] - m.x_centers[i - 1]);
                const double jy = -k * (field.at(it, i, j + 1) - field.at(it, i, j - 1)) /
                                  (m.y_centers[j + 1] - m.y_centers[j - 1]);
                ax += std::abs(jx) * m.dx(i);
                ay += std::abs(jy) * m.dx(i);
            }
        }
        out.v[it] = (ax + ay) > 0 ? ax / (ax + ay) : 1.0;
    }
    return out;
}

TimeSeries interface_flux(const Field2D& field, const Geometry& geometry,
                          const MaterialLayer& wood_fiber, const MaterialLayer& insulator,
                          const MaterialLayer& aluminum, const ReferenceScales& scales) {
    const Mesh2D& m = field.mesh;
    const double xi = geometry.interface_x();
    int iw = -1;
    for (int i = 0; i + 1 < m.nx; ++i)
        if (std::abs(m.x_faces[i + 1] - xi) < 1e-12) iw = i;
    if (iw < 0) throw DomainError("interface_flux: no mesh face on the interface");

    auto pick = [&](Material mt) -> const MaterialLayer& {
        switch (mt) {
            case Material::wood_fiber: return wood_fiber;
            case Material::insulator: return insulator;
            default: return aluminum;
        }
    };

    TimeSeries out;
    out.t = field.times;
    out.v.assign(field.times.size(), 0.0);
    for (std::size_t it = 0; it < field.times.size(); ++it) {
        double sum = 0, width = 0;
        for (int j = 0; j < m.ny; ++j) {
            const double ka = pick(m.mat(iw, j)).conductivity(field.at(it, iw, j), scales.T0);
            const double kb = pick(m.mat(iw + 1, j)).conductivity(field.at(it, iw + 1, j), scales.T0);
            const double da = 0.5 * m.dx(iw), db = 0.5 * m.dx(iw + 1);
            const double g = 1.0 / (da / ka + db / kb);  // W/m^2/K across the face
            // Positive = heat flowing in +x (into the insulator); the tape
            // columns carry most of it.
            sum += g * (field.at(it, iw, j) - field.at(it, iw + 1, j)) * m.dy(j);
            width += m.dy(j);
        }
        out.v[it] = sum / width;
    }
    return out;
}

TimeSeries aluminum_deviation(const Field2D& field, const BoundarySchedule& schedule) {
    const Mesh2D& m = field.mesh;
    double total = 0;
    std::vector<std::pair<std::size_t, double>> cells;
    for (int i = 0; i < m.nx; ++i)
        for (int j = 0; j < m.ny; ++j)
            if (m.mat(i, j) == Material::aluminum) {
                const double vol = m.dx(i) * m.dy(j);
                cells.emplace_back(static_cast<std::size_t>(i) * m.ny + j, vol);
                total += vol;
            }
    if (cells.empty()) throw DomainError("aluminum_deviation: no aluminum cells in the mesh");

    TimeSeries out;
    out.t = field.times;
    out.v.assign(field.times.size(), 0.0);
    for (std::size_t it = 0; it < field.times.size(); ++it) {
        double mean = 0;
        auto frame = field.frame(it);
        for (const auto& [q, vol] : cells) mean += frame[q] * vol;
        out.v[it] = mean / total - schedule.temperature(field.times[it]);
    }
    return out;
}

}  // namespace therminv
