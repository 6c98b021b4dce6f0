#include "therminv/field1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "therminv/errors.hpp"

namespace therminv {

Mesh1D Mesh1D::uniform(int n_nodes, double chi_interface) {
    if (n_nodes < 5) throw ConfigError("mesh: need at least 5 nodes");
    if (!(chi_interface > 0 && chi_interface < 1))
        throw ConfigError("mesh: interface must lie inside (0,1)");
    const double exact = (n_nodes - 1) * chi_interface;
    const int index = static_cast<int>(std::lround(exact));
    if (std::abs(exact - index) > 1e-9 || index <= 0 || index >= n_nodes - 1)
        throw ConfigError("mesh: no node falls on the interface (n_nodes=" +
                          std::to_string(n_nodes) + ", chi_interface=" +
                          std::to_string(chi_interface) + ")");
    Mesh1D m;
    m.n_nodes = n_nodes;
    m.chi_interface = chi_interface;
    m.interface_index = index;
    return m;
}

Field1D::Field1D(Mesh1D mesh, std::vector<double> times)
    : mesh_(mesh), times_(std::move(times)),
      values_(times_.size() * static_cast<std::size_t>(mesh.n_nodes), 0.0) {}

double Field1D::sample_at(double chi, double tau) const {
    if (!(chi >= -1e-12 && chi <= 1 + 1e-12))
        throw DomainError("sample_at: chi outside [0,1]");
    if (times_.empty() || !(tau >= times_.front() - 1e-12 && tau <= times_.back() + 1e-12))
        throw DomainError("sample_at: tau outside stored range");
    chi = std::clamp(chi, 0.0, 1.0);
    tau = std::clamp(tau, times_.front(), times_.back());

    const double pos = chi * (mesh_.n_nodes - 1);
    const int i0 = std::min(static_cast<int>(pos), mesh_.n_nodes - 2);
    const double wx = pos - i0;

    const auto it = std::upper_bound(times_.begin(), times_.end(), tau);
    std::size_t k1 = std::min<std::size_t>(it - times_.begin(), times_.size() - 1);
    std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
    const double dt = times_[k1] - times_[k0];
    const double wt = dt > 0 ? (tau - times_[k0]) / dt : 0.0;

    const double a = value(i0, k0) + wx * (value(i0 + 1, k0) - value(i0, k0));
    const double b = value(i0, k1) + wx * (value(i0 + 1, k1) - value(i0, k1));
    return a + wt * (b - a);
}

}  // namespace therminv
