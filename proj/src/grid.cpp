#include "volterra/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace volterra {

Grid::Grid(int n_steps, double horizon) : n_steps_(n_steps), horizon_(horizon) {
    if (n_steps < 2) {
        throw std::invalid_argument("Grid: n_steps must be >= 2, got " + std::to_string(n_steps));
    }
    if (!(horizon > 0.0) || horizon > 1.0) {
        throw std::invalid_argument("Grid: horizon must lie in (0, 1], got " + std::to_string(horizon));
    }
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.n_nodes()) {
        throw std::invalid_argument("GridFunction: expected " + std::to_string(grid_.n_nodes()) +
                                    " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("GridFunction: values must be finite");
        }
    }
}

GridFunction GridFunction::zeros(const Grid& grid) {
    return GridFunction(grid, std::vector<double>(static_cast<std::size_t>(grid.n_nodes()), 0.0));
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double)>& fn) {
    std::vector<double> vals(static_cast<std::size_t>(grid.n_nodes()));
    for (int i = 0; i < grid.n_nodes(); ++i) {
        vals[static_cast<std::size_t>(i)] = fn(grid.node(i));
    }
    return GridFunction(grid, std::move(vals));
}

double GridFunction::sup_distance(const GridFunction& other) const {
    if (!(grid_ == other.grid_)) {
        throw std::invalid_argument("GridFunction::sup_distance: grids differ");
    }
    double m = 0.0;
    for (int i = 0; i < size(); ++i) {
        m = std::max(m, std::abs(values_[static_cast<std::size_t>(i)] -
                                 other.values_[static_cast<std::size_t>(i)]));
    }
    return m;
}

}  // namespace volterra
