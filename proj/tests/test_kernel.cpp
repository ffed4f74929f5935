#include "volterra/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "volterra/errors.hpp"
#include "volterra/grid.hpp"
#include "volterra/specialfn.hpp"

using namespace volterra;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

double row_sum(const KernelMatrix& m, int i) {
    double acc = 0.0;
    for (double w : m.row(i)) acc += w;
    return acc;
}

}  // namespace

TEST_CASE("kh_eval degenerates to 1 at hurst one half") {
    for (int k = 1; k <= 40; ++k) {
        const double t = k / 40.0;
        for (int j = 0; j < k; ++j) {
            const double s = (j + 0.5) / 40.0;
            CHECK(kh_eval(0.5, t, s) == 1.0);
        }
    }
}

TEST_CASE("kh_eval matches reference values") {
    CHECK(rel_err(kh_eval(0.25, 1.0, 0.5), 1.0362623459594761341) < 1e-10);
    CHECK(rel_err(kh_eval(0.25, 0.9, 0.3), 1.0365844602878222745) < 1e-10);
    CHECK(rel_err(kh_eval(0.25, 0.5, 0.25), 1.2323305548244202593) < 1e-10);
    CHECK(rel_err(kh_eval(0.25, 1.0, 1.0 / 64.0), 1.5279423220165231909) < 1e-10);
    CHECK(rel_err(kh_eval(0.75, 1.0, 0.5), 0.96705967743735027333) < 1e-10);
    CHECK(rel_err(kh_eval(0.75, 0.9, 0.3), 1.0442905493883819281) < 1e-10);
    CHECK(rel_err(kh_eval(0.75, 0.5, 0.25), 0.81319701609348133609) < 1e-10);
    CHECK(rel_err(kh_eval(0.75, 1.0, 1.0 / 64.0), 1.7975722044141822723) < 1e-10);
    CHECK(rel_err(kh_eval(0.1, 0.8, 0.2), 1.2508147828130493779) < 1e-10);
    CHECK(rel_err(kh_eval(0.9, 0.8, 0.2), 1.1481841014802597184) < 1e-10);
}

TEST_CASE("kh_eval domain handling") {
    CHECK(kh_eval(0.25, 0.5, 0.5) == 0.0);
    CHECK(kh_eval(0.25, 0.5, 0.7) == 0.0);
    CHECK_THROWS_AS(kh_eval(0.25, 0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(kh_eval(0.25, 0.5, -0.1), std::domain_error);
    CHECK_THROWS_AS(kh_eval(0.0, 0.5, 0.1), std::domain_error);
    CHECK_THROWS_AS(kh_eval(1.0, 0.5, 0.1), std::domain_error);
    CHECK_THROWS_AS(kh_eval(0.25, 0.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(kh_eval(0.25, 1.5, 0.1), std::domain_error);
}

TEST_CASE("g_weight") {
    CHECK(g_weight(0.5, 0.3) == 1.0);
    CHECK(g_weight(0.75, 0.25) == doctest::Approx(std::pow(0.25, 0.25)).epsilon(1e-15));
    CHECK(g_weight(0.25, 0.25) == doctest::Approx(std::pow(0.25, 0.25)).epsilon(1e-15));
    CHECK_THROWS_AS(g_weight(0.75, 0.0), std::domain_error);
    CHECK_THROWS_AS(g_weight(1.2, 0.5), std::domain_error);
}

TEST_CASE("bound_check finds no sign violations and a stable envelope constant") {
    for (double h : {0.25, 0.75}) {
        const auto report = bound_check(h, 2000);
        CHECK(report.violations == 0);
        CHECK(report.samples == 2000);
        CHECK(report.c_fit > 0.2);
        CHECK(report.c_fit < 5.0);
    }
    const auto half = bound_check(0.5, 500);
    CHECK(half.c_fit == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(bound_check(0.25, 99), std::invalid_argument);
}

TEST_CASE("kernel matrix is strictly lower triangular with positive finite weights") {
    const Grid grid(32);
    for (double h : {0.25, 0.75}) {
        for (KernelMode mode : {KernelMode::deterministic, KernelMode::stochastic}) {
            const auto m = build_kernel_matrix(FbmKernel{h}, grid, mode);
            for (int i = 1; i <= grid.n_steps(); ++i) {
                for (int j = 0; j < i; ++j) {
                    const double w = m.at(i, j);
                    CHECK(std::isfinite(w));
                    CHECK(w > 0.0);
                }
                CHECK(m.at(i, i) == 0.0);
                CHECK(m.at(i, grid.n_steps()) == 0.0);
                CHECK(m.at(i, -1) == 0.0);
            }
        }
    }
}

TEST_CASE("hurst one half gives exact classical weights") {
    const Grid grid(64);
    const auto det = build_kernel_matrix(FbmKernel{0.5}, grid, KernelMode::deterministic);
    const auto sto = build_kernel_matrix(FbmKernel{0.5}, grid, KernelMode::stochastic);
    for (int i = 1; i <= 64; ++i) {
        for (int j = 0; j < i; ++j) {
            CHECK(det.at(i, j) == grid.dt());
            CHECK(sto.at(i, j) == 1.0);
        }
    }
}

TEST_CASE("identity kernel weights") {
    const Grid grid(16);
    const auto det = build_kernel_matrix(IdentityKernel{}, grid, KernelMode::deterministic);
    const auto sto = build_kernel_matrix(IdentityKernel{}, grid, KernelMode::stochastic);
    CHECK(det.at(7, 3) == grid.dt());
    CHECK(sto.at(7, 3) == 1.0);
}

TEST_CASE("deterministic rows integrate the kernel accurately") {
    const Grid grid(64);
    const auto m25 = build_kernel_matrix(FbmKernel{0.25}, grid, KernelMode::deterministic);
    const auto m75 = build_kernel_matrix(FbmKernel{0.75}, grid, KernelMode::deterministic);
    // integral_0^1 K(1, s) ds from 50-digit quadrature. The bulk cells
    // freeze the smooth factor once per cell, which caps the row accuracy
    // near 3e-5 on a grid this coarse; it tightens quadratically with N.
    CHECK(rel_err(row_sum(m25, 64), 1.2085366360739694373) < 1e-4);
    CHECK(rel_err(row_sum(m75, 64), 0.9803333619721421161) < 1e-4);
}

TEST_CASE("interior cells match the closed-form product rule") {
    const Grid grid(256);
    for (double h : {0.25, 0.75}) {
        const auto m = build_kernel_matrix(FbmKernel{h}, grid, KernelMode::deterministic);
        const double hp = h + 0.5;
        const double scale = 1.0 / gamma_fn(hp + 1.0);
        for (int i : {16, 100, 256}) {
            for (int j = 4; j <= i - 2; j += 7) {
                const double lag_hi = std::pow((i - j) * grid.dt(), hp);
                const double lag_lo = std::pow((i - j - 1) * grid.dt(), hp);
                const double g = hyp2f1(0.5 - h, h - 0.5, h + 0.5, 1.0 - i / (j + 0.5));
                const double want = scale * g * (lag_hi - lag_lo);
                CHECK(rel_err(m.at(i, j), want) < 1e-9);
            }
        }
    }
}

TEST_CASE("stochastic interior cells are the scaled deterministic ones") {
    const Grid grid(64);
    for (double h : {0.25, 0.75}) {
        const auto det = build_kernel_matrix(FbmKernel{h}, grid, KernelMode::deterministic);
        const auto sto = build_kernel_matrix(FbmKernel{h}, grid, KernelMode::stochastic);
        for (int i = 4; i <= 64; i += 5) {
            for (int j = 1; j < i - 1; ++j) {
                CHECK(rel_err(sto.at(i, j), det.at(i, j) / grid.dt()) < 1e-14);
            }
        }
    }
}

TEST_CASE("first-cell stochastic weight carries the cell's L2 mass") {
    const Grid grid(64);
    // integral over [0, 1/64] of K(1/64, s)^2 ds from 50-digit quadrature.
    const double mass25 = 0.19947114020071633897;
    const double mass75 = 0.0020778243770907951976;
    const auto s25 = build_kernel_matrix(FbmKernel{0.25}, grid, KernelMode::stochastic);
    const auto s75 = build_kernel_matrix(FbmKernel{0.75}, grid, KernelMode::stochastic);
    CHECK(rel_err(s25.at(1, 0), std::sqrt(mass25 / grid.dt())) < 1e-5);
    CHECK(rel_err(s75.at(1, 0), std::sqrt(mass75 / grid.dt())) < 1e-5);
}

TEST_CASE("stochastic rows reproduce the kernel's squared mass") {
    // sum_j w_ij^2 dt approximates integral_0^1 K(1, s)^2 ds, whose exact
    // value is the variance constant of the law at t = 1.
    const Grid grid(64);
    const double masses[2] = {1.5957691216057307118, 1.0638460810704871412};
    const double hs[2] = {0.25, 0.75};
    for (int c = 0; c < 2; ++c) {
        const auto m = build_kernel_matrix(FbmKernel{hs[c]}, grid, KernelMode::stochastic);
        double acc = 0.0;
        for (double w : m.row(64)) acc += w * w;
        CHECK(rel_err(acc * grid.dt(), masses[c]) < 2e-3);
    }
}

TEST_CASE("row builder and matrix agree") {
    const Grid grid(48);
    const KernelRowBuilder builder(FbmKernel{0.75}, grid, KernelMode::stochastic);
    const auto m = build_kernel_matrix(FbmKernel{0.75}, grid, KernelMode::stochastic);
    std::vector<double> row(48);
    for (int i : {1, 2, 17, 48}) {
        builder.fill_row(i, row);
        for (int j = 0; j < i; ++j) {
            CHECK(row[static_cast<std::size_t>(j)] == m.at(i, j));
        }
    }
    CHECK_THROWS_AS(builder.fill_row(0, row), std::invalid_argument);
    CHECK_THROWS_AS(builder.fill_row(49, row), std::invalid_argument);
}

TEST_CASE("tabulated kernel with exact power content") {
    // K(t, s) = (t - s)^0.3 has smooth part 1; cell weights must equal the
    // closed-form cell integrals.
    const Grid grid(32);
    TabulatedKernel k{[](double t, double s) { return std::pow(t - s, 0.3); }, 0.3};
    const auto m = build_kernel_matrix(k, grid, KernelMode::deterministic);
    for (int i : {5, 20, 32}) {
        for (int j = 0; j < i; ++j) {
            const double t = grid.node(i);
            const double want = (std::pow(t - grid.node(j), 1.3) - std::pow(t - grid.node(j + 1), 1.3)) / 1.3;
            CHECK(rel_err(m.at(i, j), want) < 1e-13);
        }
    }
}

TEST_CASE("tabulated kernel validation") {
    const Grid grid(8);
    CHECK_THROWS_AS(build_kernel_matrix(TabulatedKernel{nullptr, 0.0}, grid, KernelMode::deterministic),
                    std::invalid_argument);
    TabulatedKernel bad{[](double, double) { return 1.0; }, -0.7};
    CHECK_THROWS_AS(build_kernel_matrix(bad, grid, KernelMode::deterministic), std::invalid_argument);
}

TEST_CASE("hurst parameters immediately next to one half are rejected honestly") {
    // The deep-argument expansion of the smooth factor degenerates inside
    // |H - 1/2| < 5e-5; the build reports the convergence failure instead of
    // returning polluted weights.
    const Grid grid(64);
    CHECK_THROWS_AS(build_kernel_matrix(FbmKernel{0.5 + 1e-5}, grid, KernelMode::deterministic),
                    NumericError);
}

TEST_CASE("kernel matrix rejects invalid hurst") {
    const Grid grid(8);
    CHECK_THROWS_AS(build_kernel_matrix(FbmKernel{0.0}, grid, KernelMode::deterministic),
                    std::domain_error);
    CHECK_THROWS_AS(build_kernel_matrix(FbmKernel{-0.25}, grid, KernelMode::deterministic),
                    std::domain_error);
}
