#pragma once

#include <span>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"
#include "volterra/simulate.hpp"
#include "volterra/solver.hpp"

namespace volterra {

// Density of a Cameron-Martin direction: h(t) = int_0^t xi. Stored as the
// density so the derivative equation can consume xi pointwise.
struct Direction {
    GridFunction xi;
};

// Strictly lower-triangular table over one grid's nodes; entry (i, j) lives
// at j < i, everything else reads as zero.
class TriangularArray {
public:
    explicit TriangularArray(int n_nodes);

    int n_nodes() const noexcept { return n_nodes_; }
    double at(int i, int j) const noexcept;
    double& entry(int i, int j);
    std::span<const double> row(int i) const;
    std::span<double> row(int i);

private:
    int n_nodes_;
    std::vector<double> packed_;  // row i starts at i*(i-1)/2
};

// Truncated series kernel L(t, s) = sum_n V_n(t, s) with its convergence
// diagnostics. tail_norm is the discrete L^r(grid^2) norm of the last term
// the recursion produced.
struct VariationKernel {
    Grid grid{2};
    TriangularArray L{3};
    int terms_used = 1;
    double tail_norm = 0.0;
    std::vector<double> tail_norms;  // one entry per computed correction term
};

// Weight g of the admissibility hypothesis: s^|H - 1/2| for the fractional
// family, 1 for the identity kernel. Tabulated kernels carry no registered
// weight and are rejected.
double hypothesis_b_g(const KernelSpec& spec, double s);

// Seed kernel V_0[i][j] = (deterministic cell weight) * g(t_j). Cell j = 0
// evaluates g at the clamped node dt/2 because g vanishes at 0.
TriangularArray hypothesis_b_v0(const KernelSpec& spec, const Grid& grid);

// Discrete L^r norm of xi * g^{-1} over the nodes (clamped node at 0); the
// admissibility check for parameter_variation.
double direction_h0_norm(const KernelSpec& spec, const Grid& grid, const Direction& d,
                         double r_exponent);

// Directional derivative of the solution map along d, as the fixed point of
//   Y_i = sum_{j<i} Wd[i][j] sigma(t_j, X_j) xi_j
//       + sum_{j<i} Wd[i][j] db_dx(t_j, X_j) Y_j
//       + sum_{j<i} Ws[i][j] dsigma_dx(t_j, X_j) Y_j dB_j,
// iterated with the solver's stopping rule. X must be the solved path for
// (problem, bm) on cfg.grid.
GridFunction derivative_linear_solve(const SdeProblem& problem, const GridFunction& X,
                                     const BrownianPath& bm, const Direction& d,
                                     const SolverConfig& cfg);

GridFunction derivative_linear_solve(const SdeProblem& problem, const GridFunction& X,
                                     const BrownianPath& bm, const Direction& d,
                                     const SolverConfig& cfg, const KernelMatrices& matrices);

// Series kernel via V_{n+1}[i][j] = sum_{j<k<i} (Wd[i][k] db_dx(t_k, X_k)
// + Ws[i][k] dsigma_dx(t_k, X_k) dB_k) V_n[k][j]. Stops at n_terms terms or
// when the tail norm falls under tail_tol; five consecutive tail increases
// raise NumericError. cfg supplies the grid and the r exponent of the norms.
VariationKernel variation_series(const SdeProblem& problem, const GridFunction& X,
                                 const BrownianPath& bm, const TriangularArray& v0,
                                 const SolverConfig& cfg, int n_terms = 25,
                                 double tail_tol = 1e-10);

VariationKernel variation_series(const SdeProblem& problem, const GridFunction& X,
                                 const BrownianPath& bm, const TriangularArray& v0,
                                 const SolverConfig& cfg, const KernelMatrices& matrices,
                                 int n_terms, double tail_tol);

// Variation-of-parameters form Y_i = sum_{j<i} L[i][j] sigma(t_j, X_j)
// g(t_j)^{-1} xi_j (cell weights live inside L via V_0). Requires Lk built
// from hypothesis_b_v0 of problem.kernel; the direction must pass the
// admissibility norm check.
GridFunction parameter_variation(const VariationKernel& Lk, const SdeProblem& problem,
                                 const GridFunction& X, const Direction& d);

// Central finite difference (X+ - X-) / (2 eps) of the solution under the
// drift shift dB_j -> dB_j +- eps xi_j dt; the slow but assumption-free
// oracle for the two solvers above.
GridFunction cameron_martin_fd(const SdeProblem& problem, const BrownianPath& bm,
                               const Direction& d, double eps, const SolverConfig& cfg);

}  // namespace volterra
