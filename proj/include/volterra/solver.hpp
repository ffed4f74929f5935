#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"
#include "volterra/simulate.hpp"

namespace volterra {

// Scalar state equation
//   X_t = x0 + int_0^t K(t,s) b(s, X_s) ds + int_0^t K(t,s) sigma(s, X_s) dB_s.
// b and sigma are assumed Lipschitz in x uniformly in t with constant
// lipschitz_hint; the solver reports divergence rather than checking this.
// db_dx / dsigma_dx feed the derivative machinery and may be left null when
// only the forward solve is used.
struct SdeProblem {
    double x0 = 0.0;
    std::function<double(double, double)> b;
    std::function<double(double, double)> sigma;
    std::function<double(double, double)> db_dx;
    std::function<double(double, double)> dsigma_dx;
    double lipschitz_hint = 1.0;
    KernelSpec kernel = IdentityKernel{};
};

// r > 2 integrability exponent carried for diagnostics (tail norms, moment
// reports); it never changes the arithmetic of the solves.
struct SolverConfig {
    Grid grid{2};
    double tol = 1e-8;
    int max_picard_iters = 50;
    double r_exponent = 2.1;
};

// max(2, 1/H) + 0.1 for the singular kernel family, 2.1 otherwise.
double default_r_exponent(const KernelSpec& spec);

// Both quadrature modes of one kernel on one grid. Built once, shared by
// every path and by the derivative solves.
struct KernelMatrices {
    KernelMatrix det;
    KernelMatrix sto;
};

KernelMatrices build_kernel_matrices(const KernelSpec& spec, const Grid& grid);

struct PicardResult {
    GridFunction path;
    int iters = 0;
    double final_delta = 0.0;
    std::vector<double> deltas;  // sup-norm change per sweep
};

// Picard iteration from X^0 = x0: each sweep evaluates the coefficients on
// the previous iterate at left endpoints and applies the weight rows. Stops
// when the sup-norm change drops below cfg.tol; throws ConvergenceError with
// the delta history when the iteration budget runs out.
PicardResult picard_solve(const SdeProblem& problem, const BrownianPath& bm,
                          const SolverConfig& cfg);

// Same, reusing prebuilt matrices (they must live on cfg.grid).
PicardResult picard_solve(const SdeProblem& problem, const BrownianPath& bm,
                          const SolverConfig& cfg, const KernelMatrices& matrices);

struct EnsembleSolveResult {
    PathEnsemble ensemble;
    std::vector<int> iters;
    std::vector<double> final_deltas;
};

// Independent Brownian paths with seeds base_seed + p, one solve each.
// If any path exhausts the budget the error lists every failing seed.
EnsembleSolveResult solve_ensemble(const SdeProblem& problem, int n_paths,
                                   std::uint64_t base_seed, const SolverConfig& cfg);

struct SensitivityResult {
    std::vector<double> x_values;
    std::vector<GridFunction> paths;
    // sup_distance(paths[a], paths[b]) at [a * n + b], symmetric, zero diagonal.
    std::vector<double> pairwise;

    double distance(int a, int b) const {
        return pairwise[static_cast<std::size_t>(a) * x_values.size() +
                        static_cast<std::size_t>(b)];
    }
};

// Solves the same noise realization from each initial value; the pairwise
// sup-distances expose the continuity of the data-to-solution map.
SensitivityResult initial_condition_sensitivity(const SdeProblem& problem,
                                                const std::vector<double>& x_values,
                                                const BrownianPath& bm,
                                                const SolverConfig& cfg);

}  // namespace volterra
