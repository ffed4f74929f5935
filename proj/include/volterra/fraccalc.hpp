#pragma once

#include <vector>

#include "volterra/grid.hpp"

namespace volterra {

// Left-sided fractional integral of order alpha in (0, 1):
// (I_left f)(t_i) = (1/Gamma(alpha)) * integral_0^{t_i} (t_i - s)^(alpha-1) f(s) ds,
// with f frozen at the left endpoint of each cell and the singular factor
// integrated in closed form. Output node 0 is 0.
GridFunction frac_integral_left(const GridFunction& f, double alpha);

// Right-sided counterpart over [t_i, T], with f frozen at right endpoints.
// Output node N is 0.
GridFunction frac_integral_right(const GridFunction& f, double alpha);

// | integral_0^T f * (I_left g) dt  -  integral_0^T (I_right f) * g dt |
// by the trapezoid rule on the shared grid. Decays as the grid refines.
double duality_residual(const GridFunction& f, const GridFunction& g, double alpha);

// Discrete Holder seminorm of order nu in (0, 1) after subtracting f(0):
// max over node pairs i < j of |f(t_j) - f(t_i)| / (t_j - t_i)^nu.
double holder_norm(const GridFunction& f, double nu);

// Least-squares slope of log(max increment over windows of the given lag)
// against log(lag * dt). scales must be >= 3 distinct lags, each in [1, N/4].
// Throws NumericError if the fit degenerates (non-positive max increment).
double estimate_holder_exponent(const GridFunction& f, const std::vector<int>& scales);

// Dyadic lags 2, 4, ..., capped at 64 and at N/4. The cap keeps the large-lag
// windows numerous enough for the max statistic to concentrate.
std::vector<int> default_holder_scales(int n_steps);

}  // namespace volterra
