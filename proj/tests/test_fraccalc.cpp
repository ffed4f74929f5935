#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "volterra/errors.hpp"
#include "volterra/fraccalc.hpp"
#include "volterra/specialfn.hpp"

using namespace volterra;

namespace {

GridFunction monomial(const Grid& grid, double power) {
    return GridFunction::sample(grid, [power](double t) { return std::pow(t, power); });
}

double trapezoid(const GridFunction& a, const GridFunction& b) {
    const Grid& grid = a.grid();
    double acc = 0.0;
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double w = (i == 0 || i == grid.n_steps()) ? 0.5 : 1.0;
        acc += w * a[i] * b[i];
    }
    return acc * grid.dt();
}

}  // namespace

TEST_CASE("left fractional integral of a constant is exact") {
    // Freezing a constant loses nothing, so the power-cell closed form gives
    // t^alpha / Gamma(alpha + 1) to rounding.
    const Grid grid(64);
    for (double alpha : {0.2, 0.5, 0.8}) {
        const GridFunction one = GridFunction::sample(grid, [](double) { return 1.0; });
        const GridFunction out = frac_integral_left(one, alpha);
        CHECK(out[0] == 0.0);
        for (int i = 1; i < grid.n_nodes(); ++i) {
            const double exact = std::pow(grid.node(i), alpha) / gamma_fn(alpha + 1.0);
            CHECK(out[i] == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("right fractional integral of a constant is exact") {
    const Grid grid(64);
    for (double alpha : {0.2, 0.5, 0.8}) {
        const GridFunction one = GridFunction::sample(grid, [](double) { return 1.0; });
        const GridFunction out = frac_integral_right(one, alpha);
        CHECK(out[grid.n_steps()] == 0.0);
        for (int i = 0; i < grid.n_steps(); ++i) {
            const double exact =
                std::pow(grid.horizon() - grid.node(i), alpha) / gamma_fn(alpha + 1.0);
            CHECK(out[i] == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("left fractional integral of monomials converges at first order") {
    // I^alpha[s^m](t) = Gamma(m+1)/Gamma(m+1+alpha) t^(m+alpha). Left-endpoint
    // freezing is O(dt), so halving the step should roughly halve the error.
    const double alpha = 0.5;
    const double m = 2.0;
    auto sup_error = [&](int n) {
        const Grid grid(n);
        const GridFunction out = frac_integral_left(monomial(grid, m), alpha);
        double err = 0.0;
        for (int i = 1; i < grid.n_nodes(); ++i) {
            const double exact = gamma_fn(m + 1.0) / gamma_fn(m + 1.0 + alpha) *
                                 std::pow(grid.node(i), m + alpha);
            err = std::max(err, std::abs(out[i] - exact));
        }
        return err;
    };
    const double e256 = sup_error(256);
    const double e512 = sup_error(512);
    CHECK(e256 < 5e-3);
    CHECK(e512 < e256);
    CHECK(e256 / e512 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("duality pairing reproduces the closed form") {
    // f(t) = t, g(t) = 1 - t, alpha = 1/2: both sides of the duality identity
    // equal 44/(105 sqrt(pi)).
    const double expected = 0.23642230167715501548;
    const Grid grid(2048);
    const GridFunction f = GridFunction::sample(grid, [](double t) { return t; });
    const GridFunction g = GridFunction::sample(grid, [](double t) { return 1.0 - t; });
    const double lhs = trapezoid(f, frac_integral_left(g, 0.5));
    const double rhs = trapezoid(frac_integral_right(f, 0.5), g);
    CHECK(lhs == doctest::Approx(expected).epsilon(2e-3));
    CHECK(rhs == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("duality is exact when boundary terms vanish") {
    // The left and right cell quadratures share the identical coefficient
    // (t_i - t_j)^alpha - (t_i - t_j - dt)^alpha, so the discrete pairing is
    // exactly adjoint; only the trapezoid half-weights at f(T) and g(0) can
    // break it. Kill both and the residual is rounding noise.
    const Grid grid(128);
    const GridFunction f = GridFunction::sample(grid, [](double t) { return t * (1.0 - t); });
    const GridFunction g =
        GridFunction::sample(grid, [](double t) { return std::sin(3.141592653589793 * t); });
    CHECK(duality_residual(f, g, 0.3) < 1e-14);
    CHECK(duality_residual(f, g, 0.7) < 1e-14);
}

TEST_CASE("duality residual decays under refinement") {
    // Nonzero f(T) and g(0) leave an O(dt) boundary mismatch.
    const double alpha = 0.5;
    auto residual = [&](int n) {
        const Grid grid(n);
        const GridFunction f = GridFunction::sample(grid, [](double t) { return std::cos(3.0 * t); });
        const GridFunction g = GridFunction::sample(grid, [](double t) { return std::exp(t); });
        return duality_residual(f, g, alpha);
    };
    const double r128 = residual(128);
    const double r512 = residual(512);
    const double r2048 = residual(2048);
    CHECK(r128 < 2e-2);
    CHECK(r512 < r128);
    CHECK(r2048 < r512);
}

TEST_CASE("fractional integral domain validation") {
    const Grid grid(16);
    const GridFunction f = GridFunction::zeros(grid);
    CHECK_THROWS_AS(frac_integral_left(f, 0.0), std::domain_error);
    CHECK_THROWS_AS(frac_integral_left(f, 1.0), std::domain_error);
    CHECK_THROWS_AS(frac_integral_left(f, -0.3), std::domain_error);
    CHECK_THROWS_AS(frac_integral_right(f, 1.7), std::domain_error);
    const Grid other(32);
    CHECK_THROWS_AS(duality_residual(f, GridFunction::zeros(other), 0.5),
                    std::invalid_argument);
}

TEST_CASE("holder seminorm of powers matches the closed form") {
    // For f(t) = t^nu the ratio |f(t) - f(s)| / (t-s)^nu is maximized at s = 0,
    // t arbitrary, where it equals exactly 1.
    const Grid grid(256);
    for (double nu : {0.25, 0.5, 0.75}) {
        const GridFunction f = monomial(grid, nu);
        CHECK(holder_norm(f, nu) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("holder seminorm ignores the value at zero") {
    const Grid grid(64);
    GridFunction f = GridFunction::sample(grid, [](double t) { return 3.0 + 2.0 * t; });
    const GridFunction g = GridFunction::sample(grid, [](double t) { return 2.0 * t; });
    CHECK(holder_norm(f, 0.5) == doctest::Approx(holder_norm(g, 0.5)).epsilon(1e-14));
}

TEST_CASE("holder seminorm validation") {
    const Grid grid(16);
    const GridFunction f = GridFunction::zeros(grid);
    CHECK_THROWS_AS(holder_norm(f, 0.0), std::domain_error);
    CHECK_THROWS_AS(holder_norm(f, 1.0), std::domain_error);
}

TEST_CASE("holder exponent estimator recovers smooth slopes") {
    // f(t) = t is Lipschitz: max increments over lag m scale exactly like
    // (m dt)^1, so the fitted slope is 1 to rounding.
    const Grid grid(1024);
    const GridFunction f = GridFunction::sample(grid, [](double t) { return t; });
    const double slope = estimate_holder_exponent(f, default_holder_scales(grid.n_steps()));
    CHECK(slope == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("holder exponent estimator recovers a pure power") {
    // f(t) = t^0.3: the max lag-m increment is (m dt)^0.3 (attained at zero),
    // giving slope 0.3 exactly.
    const Grid grid(1024);
    const GridFunction f = monomial(grid, 0.3);
    const double slope = estimate_holder_exponent(f, default_holder_scales(grid.n_steps()));
    CHECK(slope == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("holder exponent estimator validation") {
    const Grid grid(64);
    const GridFunction f = GridFunction::sample(grid, [](double t) { return t; });
    CHECK_THROWS_AS(estimate_holder_exponent(f, {2, 4}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_holder_exponent(f, {2, 4, 64}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_holder_exponent(f, {0, 2, 4}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_holder_exponent(GridFunction::zeros(grid), {2, 4, 8}),
                    NumericError);
}

TEST_CASE("default holder scales are dyadic and capped") {
    CHECK(default_holder_scales(1024) == std::vector<int>{2, 4, 8, 16, 32, 64});
    CHECK(default_holder_scales(64) == std::vector<int>{2, 4, 8, 16});
    CHECK(default_holder_scales(16384) == std::vector<int>{2, 4, 8, 16, 32, 64});
}
