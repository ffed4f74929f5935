#include "volterra/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "volterra/errors.hpp"
#include "volterra/specialfn.hpp"

namespace volterra {

namespace {

void check_order(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("fractional order must lie in (0, 1), got " + std::to_string(alpha));
    }
}

// table[m] = (m * dt)^alpha for m = 0..n. Differences of consecutive entries
// give the exact cell integrals of the singular factor.
std::vector<double> lag_power_table(const Grid& grid, double alpha) {
    std::vector<double> table(static_cast<std::size_t>(grid.n_steps()) + 1);
    for (int m = 0; m <= grid.n_steps(); ++m) {
        table[static_cast<std::size_t>(m)] = std::pow(m * grid.dt(), alpha);
    }
    return table;
}

double trapezoid(const Grid& grid, const std::vector<double>& v) {
    double acc = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) acc += v[i];
    return acc * grid.dt();
}

}  // namespace

GridFunction frac_integral_left(const GridFunction& f, double alpha) {
    check_order(alpha);
    const Grid& grid = f.grid();
    const int n = grid.n_steps();
    const auto table = lag_power_table(grid, alpha);
    const double scale = 1.0 / (gamma_fn(alpha) * alpha);  // 1/Gamma(alpha+1)
    GridFunction out = GridFunction::zeros(grid);
    for (int i = 1; i <= n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            const std::size_t m = static_cast<std::size_t>(i - j);
            acc += f[j] * (table[m] - table[m - 1]);
        }
        out[i] = scale * acc;
    }
    return out;
}

GridFunction frac_integral_right(const GridFunction& f, double alpha) {
    check_order(alpha);
    const Grid& grid = f.grid();
    const int n = grid.n_steps();
    const auto table = lag_power_table(grid, alpha);
    const double scale = 1.0 / (gamma_fn(alpha) * alpha);
    GridFunction out = GridFunction::zeros(grid);
    for (int i = n - 1; i >= 0; --i) {
        double acc = 0.0;
        for (int j = i; j < n; ++j) {
            const std::size_t m = static_cast<std::size_t>(j - i);
            acc += f[j + 1] * (table[m + 1] - table[m]);
        }
        out[i] = scale * acc;
    }
    return out;
}

double duality_residual(const GridFunction& f, const GridFunction& g, double alpha) {
    if (!(f.grid() == g.grid())) {
        throw std::invalid_argument("duality_residual: grids differ");
    }
    const GridFunction left_g = frac_integral_left(g, alpha);
    const GridFunction right_f = frac_integral_right(f, alpha);
    std::vector<double> lhs(f.values().size()), rhs(f.values().size());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        lhs[i] = f.values()[i] * left_g.values()[i];
        rhs[i] = right_f.values()[i] * g.values()[i];
    }
    return std::abs(trapezoid(f.grid(), lhs) - trapezoid(f.grid(), rhs));
}

double holder_norm(const GridFunction& f, double nu) {
    if (!(nu > 0.0) || !(nu < 1.0)) {
        throw std::domain_error("holder_norm: nu must lie in (0, 1), got " + std::to_string(nu));
    }
    const Grid& grid = f.grid();
    const int n = grid.n_steps();
    const auto table = lag_power_table(grid, nu);
    const double f0 = f[0];
    double best = 0.0;
    for (int lag = 1; lag <= n; ++lag) {
        double inc = 0.0;
        for (int i = 0; i + lag <= n; ++i) {
            inc = std::max(inc, std::abs((f[i + lag] - f0) - (f[i] - f0)));
        }
        best = std::max(best, inc / table[static_cast<std::size_t>(lag)]);
    }
    return best;
}

double estimate_holder_exponent(const GridFunction& f, const std::vector<int>& scales) {
    const int n = f.grid().n_steps();
    if (scales.size() < 3) {
        throw std::invalid_argument("estimate_holder_exponent: need at least 3 scales");
    }
    for (int s : scales) {
        if (s < 1 || s > n / 4) {
            throw std::invalid_argument("estimate_holder_exponent: scale " + std::to_string(s) +
                                        " outside [1, N/4]");
        }
    }
    std::vector<double> xs, ys;
    xs.reserve(scales.size());
    ys.reserve(scales.size());
    for (int lag : scales) {
        double inc = 0.0;
        for (int i = 0; i + lag <= n; ++i) {
            inc = std::max(inc, std::abs(f[i + lag] - f[i]));
        }
        if (!(inc > 0.0)) {
            throw NumericError("estimate_holder_exponent: zero max increment at lag " +
                               std::to_string(lag));
        }
        xs.push_back(std::log(lag * f.grid().dt()));
        ys.push_back(std::log(inc));
    }
    const std::size_t m = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw NumericError("estimate_holder_exponent: scales are not distinct");
    }
    return sxy / sxx;
}

std::vector<int> default_holder_scales(int n_steps) {
    std::vector<int> scales;
    for (int lag = 2; lag <= std::min(64, n_steps / 4); lag *= 2) {
        scales.push_back(lag);
    }
    return scales;
}

}  // namespace volterra
