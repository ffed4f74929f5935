#pragma once

#include <functional>
#include <vector>

namespace volterra {

// Uniform time grid 0 = t_0 < t_1 < ... < t_N = T with t_i = i*T/N.
class Grid {
public:
    // n_steps >= 2, horizon in (0, 1].
    explicit Grid(int n_steps, double horizon = 1.0);

    int n_steps() const noexcept { return n_steps_; }
    int n_nodes() const noexcept { return n_steps_ + 1; }
    double horizon() const noexcept { return horizon_; }
    double dt() const noexcept { return horizon_ / n_steps_; }
    double node(int i) const noexcept { return horizon_ * i / n_steps_; }

    bool operator==(const Grid& other) const noexcept = default;

private:
    int n_steps_;
    double horizon_;
};

// Real-valued function sampled at every grid node. values[i] corresponds to node(i).
class GridFunction {
public:
    GridFunction(Grid grid, std::vector<double> values);

    static GridFunction zeros(const Grid& grid);
    static GridFunction sample(const Grid& grid, const std::function<double(double)>& fn);

    const Grid& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }
    double operator[](int i) const noexcept { return values_[i]; }
    double& operator[](int i) noexcept { return values_[i]; }
    int size() const noexcept { return static_cast<int>(values_.size()); }

    // max_i |this[i] - other[i]|; grids must match.
    double sup_distance(const GridFunction& other) const;

private:
    Grid grid_;
    std::vector<double> values_;
};

}  // namespace volterra
