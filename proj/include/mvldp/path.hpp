#pragma once

#include <cstddef>
#include <vector>

#include "mvldp/state.hpp"

namespace mvldp {

/// Trajectory on the uniform grid t_k = k·T/K; column k holds the state at t_k.
struct Path {
    std::vector<double> time_grid;
    Eigen::MatrixXd states;  ///< n × (K+1)

    Path() = default;
    Path(double T, std::size_t K, std::size_t dim);

    std::size_t steps() const noexcept { return time_grid.empty() ? 0 : time_grid.size() - 1; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(states.rows()); }
    double dt() const { return time_grid.back() / static_cast<double>(steps()); }

    auto state(std::size_t k) { return states.col(static_cast<Eigen::Index>(k)); }
    auto state(std::size_t k) const { return states.col(static_cast<Eigen::Index>(k)); }
    auto terminal() const { return state(steps()); }
};

std::vector<double> uniform_grid(double T, std::size_t K);

}  // namespace mvldp
