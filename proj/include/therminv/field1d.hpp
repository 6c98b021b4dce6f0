#pragma once

#include <span>
#include <vector>

namespace therminv {

/// Uniform node set on [0, 1] with one node exactly on the material
/// interface.
struct Mesh1D {
    int n_nodes = 101;
    double chi_interface = 0.5;
    int interface_index = 50;

    double h() const { return 1.0 / (n_nodes - 1); }
    double chi(int i) const { return static_cast<double>(i) * h(); }

    /// Throws ConfigError unless (n_nodes-1)*chi_interface is an integer
    /// node index strictly inside the domain.
    static Mesh1D uniform(int n_nodes, double chi_interface);
};

/// Node-by-time dimensionless temperatures with bilinear sampling.
class Field1D {
public:
    Field1D() = default;
    Field1D(Mesh1D mesh, std::vector<double> times);

    const Mesh1D& mesh() const { return mesh_; }
    const std::vector<double>& times() const { return times_; }
    int n_nodes() const { return mesh_.n_nodes; }
    std::size_t n_times() const { return times_.size(); }

    double value(int node, std::size_t time_index) const {
        return values_[time_index * mesh_.n_nodes + node];
    }
    std::span<double> row(std::size_t time_index) {
        return {values_.data() + time_index * mesh_.n_nodes,
                static_cast<std::size_t>(mesh_.n_nodes)};
    }
    std::span<const double> row(std::size_t time_index) const {
        return {values_.data() + time_index * mesh_.n_nodes,
                static_cast<std::size_t>(mesh_.n_nodes)};
    }

    /// Linear interpolation in space and time; exact at nodes and stored
    /// times. Throws DomainError outside [0,1] x [times.front, times.back].
    double sample_at(double chi, double tau) const;

private:
    Mesh1D mesh_;
    std::vector<double> times_;
    std::vector<double> values_;  // [time][node]
};

}  // namespace therminv
