#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"

namespace volterra {

// Brownian increments over one grid: increments[j] ~ N(0, dt) drives cell j.
struct BrownianPath {
    Grid grid;
    std::vector<double> increments;  // size n_steps
    std::uint64_t seed = 0;

    // Running sum, node 0 at zero.
    GridFunction cumulative() const;
};

// Deterministic given (grid, seed); the same seed reproduces the same path
// bit for bit across runs.
BrownianPath sample_brownian(const Grid& grid, std::uint64_t seed);

// Variance constant of the law at t = 1:
// Gamma(2 - 2H) cos(pi H) / (pi H (1 - 2H)), continued by its limit 1 at H = 1/2.
double v_h(double hurst);

// Covariance (v_h / 2)(s^2H + t^2H - |t - s|^2H) for s, t in [0, 1].
double covariance_rh(double hurst, double s, double t);

// Path integral of the stochastic-mode kernel row against u * dB:
// out[i] = sum_j w_ij u(t_j) dB_j. u = 1 recovers the driven noise itself.
GridFunction stochastic_convolution(const KernelMatrix& weights, const GridFunction& u,
                                    const BrownianPath& bm);

// Kernel-route fractional Brownian sample on the matrix's grid.
GridFunction fbm_from_kernel(const KernelMatrix& weights, const BrownianPath& bm);

// Convenience overload: builds the stochastic-mode weight matrix for hurst on
// bm's grid, then applies it. Prefer the matrix form inside loops.
GridFunction fbm_from_kernel(double hurst, const BrownianPath& bm);

struct PathEnsemble {
    Grid grid{2};
    std::vector<GridFunction> paths;
    std::vector<std::uint64_t> seeds;
    std::string label;
};

// n_paths kernel-route samples with seeds base_seed + p. Rows are streamed,
// so grids too large for the full weight table are fine.
PathEnsemble fbm_ensemble(const FbmKernel& kernel, const Grid& grid, int n_paths,
                          std::uint64_t base_seed);

// Exact-law samples through a dense Cholesky factor of the covariance at the
// positive nodes. The factorization happens once per sampler.
class FbmCholeskySampler {
public:
    FbmCholeskySampler(double hurst, const Grid& grid);
    ~FbmCholeskySampler();
    FbmCholeskySampler(FbmCholeskySampler&&) noexcept;
    FbmCholeskySampler& operator=(FbmCholeskySampler&&) noexcept;

    GridFunction sample(std::uint64_t seed) const;
    double jitter() const noexcept;  // diagonal shift the factorization needed, 0 if none

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

GridFunction fbm_cholesky(double hurst, const Grid& grid, std::uint64_t seed);

PathEnsemble cholesky_ensemble(double hurst, const Grid& grid, int n_paths,
                               std::uint64_t base_seed);

// Unbiased sample covariance over the nodes (mean-centered, 1/(n-1)) with
// per-entry standard errors under the Gaussian moment formula
// var(c_ij) = (c_ii c_jj + c_ij^2)/(n-1).
struct CovarianceStats {
    int n_nodes = 0;
    int n_paths = 0;
    std::vector<double> cov;  // row-major (n_nodes x n_nodes)
    std::vector<double> se;   // same layout

    double cov_at(int i, int j) const { return cov[static_cast<std::size_t>(i) * n_nodes + j]; }
    double se_at(int i, int j) const { return se[static_cast<std::size_t>(i) * n_nodes + j]; }
};

CovarianceStats ensemble_covariance(const PathEnsemble& ensemble);

}  // namespace volterra
