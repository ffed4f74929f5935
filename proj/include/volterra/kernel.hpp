#pragma once

#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "volterra/grid.hpp"

namespace volterra {

// Singular convolution kernel of a fractional-Brownian type with Hurst
// parameter in (0, 1). Reduces to the constant 1 at hurst = 1/2.
struct FbmKernel {
    double hurst;
};

// K identically 1: the classical (non-Volterra) dynamics.
struct IdentityKernel {};

// User-supplied kernel with a known power behaviour (t-s)^singularity_exponent
// near the diagonal; the quadrature divides that factor out before freezing
// the remainder at cell midpoints.
struct TabulatedKernel {
    std::function<double(double, double)> fn;  // K(t, s) for 0 <= s < t
    double singularity_exponent = 0.0;         // in (-1/2, 1/2]
};

using KernelSpec = std::variant<IdentityKernel, FbmKernel, TabulatedKernel>;

// deterministic: cell weights approximate integral_cell K(t_i, s) ds.
// stochastic:   per-cell factors w with w * dB matching the L2 action of
//               integral_cell K(t_i, s) dB_s on the grid.
enum class KernelMode { deterministic, stochastic };

// Pointwise kernel value. hurst in (0, 1), 0 < t <= 1, s > 0; s >= t gives 0.
// Exactly 1 at hurst = 1/2.
double kh_eval(double hurst, double t, double s);

// Weight s^|hurst - 1/2| entering the weighted-direction admissibility check.
double g_weight(double hurst, double s);

struct BoundCheckReport {
    double c_fit = 0.0;   // max of K(t,s) / ((t-s)^(H-1/2) s^(-|H-1/2|))
    long violations = 0;  // samples with K < -1e-12
    int samples = 0;
};

// Low-discrepancy sweep of the domain checking positivity and the power
// envelope of the kernel. samples >= 100.
BoundCheckReport bound_check(double hurst, int samples);

// Strictly lower-triangular weight table, rows i = 1..N, columns j = 0..i-1.
class KernelMatrix {
public:
    KernelMatrix(Grid grid, KernelMode mode, std::vector<double> packed);

    const Grid& grid() const noexcept { return grid_; }
    KernelMode mode() const noexcept { return mode_; }

    // Weight of cell j in row i; 0 outside the strict lower triangle.
    double at(int i, int j) const;

    // Contiguous row i, entries j = 0..i-1.
    std::span<const double> row(int i) const;

private:
    Grid grid_;
    KernelMode mode_;
    std::vector<double> packed_;  // row-major, row i starts at i*(i-1)/2
};

// Streams rows one at a time so callers can integrate against the kernel at
// grid sizes where the full triangle would not fit in memory.
class KernelRowBuilder {
public:
    KernelRowBuilder(const KernelSpec& spec, const Grid& grid, KernelMode mode);
    ~KernelRowBuilder();
    KernelRowBuilder(KernelRowBuilder&&) noexcept;
    KernelRowBuilder& operator=(KernelRowBuilder&&) noexcept;

    // Writes weights for cells j = 0..i-1 into out. 1 <= i <= N.
    void fill_row(int i, std::span<double> out) const;

    const Grid& grid() const noexcept;
    KernelMode mode() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

KernelMatrix build_kernel_matrix(const KernelSpec& spec, const Grid& grid, KernelMode mode);

}  // namespace volterra
