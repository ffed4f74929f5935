#include "volterra/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "volterra/errors.hpp"

namespace volterra {

namespace {

void require_derivatives(const SdeProblem& problem, const char* who) {
    if (!problem.b || !problem.sigma) {
        throw std::invalid_argument(std::string(who) + ": problem callbacks are null");
    }
    if (!problem.db_dx || !problem.dsigma_dx) {
        throw std::invalid_argument(std::string(who) +
                                    ": db_dx and dsigma_dx callbacks are required");
    }
}

void require_aligned(const Grid& grid, const GridFunction& X, const BrownianPath& bm,
                     const GridFunction& xi, const char* who) {
    if (!(X.grid() == grid) || !(bm.grid == grid) || !(xi.grid() == grid)) {
        throw std::invalid_argument(std::string(who) + ": grid mismatch");
    }
}

// Node weight of the admissibility function g; node 0 is clamped to dt/2
// where g would otherwise vanish.
double g_at_node(const KernelSpec& spec, const Grid& grid, int j) {
    const double s = (j == 0) ? 0.5 * grid.dt() : grid.node(j);
    return hypothesis_b_g(spec, s);
}

}  // namespace

TriangularArray::TriangularArray(int n_nodes) : n_nodes_(n_nodes) {
    if (n_nodes < 2) throw std::invalid_argument("TriangularArray: need at least 2 nodes");
    const std::size_t n = static_cast<std::size_t>(n_nodes);
    packed_.assign(n * (n - 1) / 2, 0.0);
}

double TriangularArray::at(int i, int j) const noexcept {
    if (j < 0 || j >= i || i >= n_nodes_) return 0.0;
    return packed_[static_cast<std::size_t>(i) * (i - 1) / 2 + static_cast<std::size_t>(j)];
}

double& TriangularArray::entry(int i, int j) {
    if (i < 1 || i >= n_nodes_ || j < 0 || j >= i) {
        throw std::invalid_argument("TriangularArray: entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") is outside the strict lower triangle");
    }
    return packed_[static_cast<std::size_t>(i) * (i - 1) / 2 + static_cast<std::size_t>(j)];
}

std::span<const double> TriangularArray::row(int i) const {
    if (i < 1 || i >= n_nodes_) throw std::invalid_argument("TriangularArray: bad row index");
    return {packed_.data() + static_cast<std::size_t>(i) * (i - 1) / 2,
            static_cast<std::size_t>(i)};
}

std::span<double> TriangularArray::row(int i) {
    if (i < 1 || i >= n_nodes_) throw std::invalid_argument("TriangularArray: bad row index");
    return {packed_.data() + static_cast<std::size_t>(i) * (i - 1) / 2,
            static_cast<std::size_t>(i)};
}

double hypothesis_b_g(const KernelSpec& spec, double s) {
    if (std::holds_alternative<IdentityKernel>(spec)) return 1.0;
    if (const auto* fbm = std::get_if<FbmKernel>(&spec)) return g_weight(fbm->hurst, s);
    throw std::invalid_argument("hypothesis_b_g: no admissibility weight registered for "
                                "tabulated kernels");
}

TriangularArray hypothesis_b_v0(const KernelSpec& spec, const Grid& grid) {
    const KernelMatrix det = build_kernel_matrix(spec, grid, KernelMode::deterministic);
    TriangularArray v0(grid.n_nodes());
    for (int i = 1; i < grid.n_nodes(); ++i) {
        auto src = det.row(i);
        auto dst = v0.row(i);
        for (int j = 0; j < i; ++j) {
            dst[static_cast<std::size_t>(j)] =
                src[static_cast<std::size_t>(j)] * g_at_node(spec, grid, j);
        }
    }
    return v0;
}

double direction_h0_norm(const KernelSpec& spec, const Grid& grid, const Direction& d,
                         double r_exponent) {
    if (!(d.xi.grid() == grid)) throw std::invalid_argument("direction_h0_norm: grid mismatch");
    if (!(r_exponent > 2.0)) {
        throw std::invalid_argument("direction_h0_norm: r_exponent must exceed 2");
    }
    double acc = 0.0;
    for (int j = 0; j < grid.n_nodes(); ++j) {
        const double ratio = std::abs(d.xi[j]) / g_at_node(spec, grid, j);
        acc += std::pow(ratio, r_exponent) * grid.dt();
    }
    return std::pow(acc, 1.0 / r_exponent);
}

GridFunction derivative_linear_solve(const SdeProblem& problem, const GridFunction& X,
                                     const BrownianPath& bm, const Direction& d,
                                     const SolverConfig& cfg) {
    return derivative_linear_solve(problem, X, bm, d, cfg,
                                   build_kernel_matrices(problem.kernel, cfg.grid));
}

GridFunction derivative_linear_solve(const SdeProblem& problem, const GridFunction& X,
                                     const BrownianPath& bm, const Direction& d,
                                     const SolverConfig& cfg, const KernelMatrices& matrices) {
    require_derivatives(problem, "derivative_linear_solve");
    require_aligned(cfg.grid, X, bm, d.xi, "derivative_linear_solve");
    const Grid& grid = cfg.grid;
    const int n_nodes = grid.n_nodes();
    const int n_steps = grid.n_steps();

    // Source and multiplier terms are frozen in X, so they are computed once.
    std::vector<double> source(static_cast<std::size_t>(n_steps));
    std::vector<double> drift_mul(static_cast<std::size_t>(n_steps));
    std::vector<double> noise_mul(static_cast<std::size_t>(n_steps));
    for (int j = 0; j < n_steps; ++j) {
        const double t = grid.node(j);
        const double x = X[j];
        source[static_cast<std::size_t>(j)] = problem.sigma(t, x) * d.xi[j];
        drift_mul[static_cast<std::size_t>(j)] = problem.db_dx(t, x);
        noise_mul[static_cast<std::size_t>(j)] =
            problem.dsigma_dx(t, x) * bm.increments[static_cast<std::size_t>(j)];
        if (!std::isfinite(source[static_cast<std::size_t>(j)]) ||
            !std::isfinite(drift_mul[static_cast<std::size_t>(j)]) ||
            !std::isfinite(noise_mul[static_cast<std::size_t>(j)])) {
            throw NumericError("derivative_linear_solve: non-finite coefficient at t = " +
                               std::to_string(t));
        }
    }

    std::vector<double> prev(static_cast<std::size_t>(n_nodes), 0.0);
    std::vector<double> next(static_cast<std::size_t>(n_nodes), 0.0);
    std::vector<double> deltas;
    for (int iter = 1; iter <= cfg.max_picard_iters; ++iter) {
        double delta = 0.0;
        for (int i = 1; i < n_nodes; ++i) {
            auto wd = matrices.det.row(i);
            auto ws = matrices.sto.row(i);
            double acc = 0.0;
            for (int j = 0; j < i; ++j) {
                const double y = prev[static_cast<std::size_t>(j)];
                acc += wd[static_cast<std::size_t>(j)] *
                           (source[static_cast<std::size_t>(j)] +
                            drift_mul[static_cast<std::size_t>(j)] * y) +
                       ws[static_cast<std::size_t>(j)] * noise_mul[static_cast<std::size_t>(j)] * y;
            }
            next[static_cast<std::size_t>(i)] = acc;
            delta = std::max(delta, std::abs(acc - prev[static_cast<std::size_t>(i)]));
        }
        deltas.push_back(delta);
        std::swap(prev, next);
        if (!std::isfinite(delta)) {
            throw NumericError("derivative_linear_solve: iteration diverged");
        }
        if (delta < cfg.tol) return GridFunction(grid, std::move(prev));
    }
    throw ConvergenceError("derivative_linear_solve: no convergence within " +
                               std::to_string(cfg.max_picard_iters) + " sweeps",
                           deltas);
}

VariationKernel variation_series(const SdeProblem& problem, const GridFunction& X,
                                 const BrownianPath& bm, const TriangularArray& v0,
                                 const SolverConfig& cfg, int n_terms, double tail_tol) {
    return variation_series(problem, X, bm, v0, cfg,
                            build_kernel_matrices(problem.kernel, cfg.grid), n_terms, tail_tol);
}

VariationKernel variation_series(const SdeProblem& problem, const GridFunction& X,
                                 const BrownianPath& bm, const TriangularArray& v0,
                                 const SolverConfig& cfg, const KernelMatrices& matrices,
                                 int n_terms, double tail_tol) {
    require_derivatives(problem, "variation_series");
    if (!(X.grid() == cfg.grid) || !(bm.grid == cfg.grid)) {
        throw std::invalid_argument("variation_series: grid mismatch");
    }
    if (v0.n_nodes() != cfg.grid.n_nodes()) {
        throw std::invalid_argument("variation_series: seed kernel size mismatch");
    }
    if (n_terms < 1) throw std::invalid_argument("variation_series: n_terms must be >= 1");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("variation_series: tail_tol must be > 0");

    const Grid& grid = cfg.grid;
    const int n_nodes = grid.n_nodes();
    const double r = cfg.r_exponent;
    const double cell_measure = grid.dt() * grid.dt();

    // coeff[k] multiplies V_n[k][j] when row i integrates over cell k.
    std::vector<double> drift_mul(static_cast<std::size_t>(n_nodes - 1));
    std::vector<double> noise_mul(static_cast<std::size_t>(n_nodes - 1));
    for (int k = 0; k + 1 < n_nodes; ++k) {
        const double t = grid.node(k);
        drift_mul[static_cast<std::size_t>(k)] = problem.db_dx(t, X[k]);
        noise_mul[static_cast<std::size_t>(k)] =
            problem.dsigma_dx(t, X[k]) * bm.increments[static_cast<std::size_t>(k)];
        if (!std::isfinite(drift_mul[static_cast<std::size_t>(k)]) ||
            !std::isfinite(noise_mul[static_cast<std::size_t>(k)])) {
            throw NumericError("variation_series: non-finite coefficient at t = " +
                               std::to_string(t));
        }
    }

    auto lr_norm = [&](const TriangularArray& term) {
        double acc = 0.0;
        for (int i = 1; i < n_nodes; ++i) {
            auto row = term.row(i);
            for (double v : row) acc += std::pow(std::abs(v), r) * cell_measure;
        }
        return std::pow(acc, 1.0 / r);
    };

    VariationKernel out{grid, v0, 1, 0.0, {}};
    TriangularArray current = v0;
    TriangularArray next(n_nodes);
    int rising = 0;
    for (int n = 1; n < n_terms; ++n) {
        for (int i = 1; i < n_nodes; ++i) {
            auto wd = matrices.det.row(i);
            auto ws = matrices.sto.row(i);
            auto dst = next.row(i);
            for (int j = 0; j < i; ++j) {
                double acc = 0.0;
                for (int k = j + 1; k < i; ++k) {
                    const double w =
                        wd[static_cast<std::size_t>(k)] * drift_mul[static_cast<std::size_t>(k)] +
                        ws[static_cast<std::size_t>(k)] * noise_mul[static_cast<std::size_t>(k)];
                    acc += w * current.at(k, j);
                }
                dst[static_cast<std::size_t>(j)] = acc;
            }
        }
        const double tail = lr_norm(next);
        if (!std::isfinite(tail)) {
            throw NumericError("variation_series: tail norm is not finite at term " +
                               std::to_string(n));
        }
        out.tail_norms.push_back(tail);
        out.tail_norm = tail;
        if (!out.tail_norms.empty() && out.tail_norms.size() >= 2 &&
            tail > out.tail_norms[out.tail_norms.size() - 2]) {
            if (++rising >= 5) {
                throw NumericError("variation_series: tail norms increased over 5 consecutive "
                                   "terms, series looks divergent");
            }
        } else {
            rising = 0;
        }
        if (tail < tail_tol) {
            // Still fold the (negligible) term in; it does not count as used.
            for (int i = 1; i < n_nodes; ++i) {
                auto dst = out.L.row(i);
                auto src = next.row(i);
                for (int j = 0; j < i; ++j) dst[static_cast<std::size_t>(j)] += src[static_cast<std::size_t>(j)];
            }
            return out;
        }
        for (int i = 1; i < n_nodes; ++i) {
            auto dst = out.L.row(i);
            auto src = next.row(i);
            for (int j = 0; j < i; ++j) dst[static_cast<std::size_t>(j)] += src[static_cast<std::size_t>(j)];
        }
        out.terms_used = n + 1;
        std::swap(current, next);
    }
    return out;
}

GridFunction parameter_variation(const VariationKernel& Lk, const SdeProblem& problem,
                                 const GridFunction& X, const Direction& d) {
    if (!problem.sigma) throw std::invalid_argument("parameter_variation: sigma callback is null");
    const Grid& grid = Lk.grid;
    if (!(X.grid() == grid) || !(d.xi.grid() == grid)) {
        throw std::invalid_argument("parameter_variation: grid mismatch");
    }
    if (Lk.L.n_nodes() != grid.n_nodes()) {
        throw std::invalid_argument("parameter_variation: kernel size mismatch");
    }

    const double r = default_r_exponent(problem.kernel);
    const double h0 = direction_h0_norm(problem.kernel, grid, d, r);
    if (!std::isfinite(h0)) {
        throw std::domain_error("parameter_variation: direction fails the g-weighted "
                                "admissibility norm (not in the weighted domain)");
    }

    const int n_nodes = grid.n_nodes();
    std::vector<double> weighted(static_cast<std::size_t>(n_nodes - 1));
    for (int j = 0; j + 1 < n_nodes; ++j) {
        weighted[static_cast<std::size_t>(j)] =
            problem.sigma(grid.node(j), X[j]) * d.xi[j] / g_at_node(problem.kernel, grid, j);
    }
    std::vector<double> values(static_cast<std::size_t>(n_nodes), 0.0);
    for (int i = 1; i < n_nodes; ++i) {
        auto row = Lk.L.row(i);
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            acc += row[static_cast<std::size_t>(j)] * weighted[static_cast<std::size_t>(j)];
        }
        values[static_cast<std::size_t>(i)] = acc;
    }
    return GridFunction(grid, std::move(values));
}

GridFunction cameron_martin_fd(const SdeProblem& problem, const BrownianPath& bm,
                               const Direction& d, double eps, const SolverConfig& cfg) {
    if (!(eps > 0.0)) throw std::invalid_argument("cameron_martin_fd: eps must be positive");
    if (!(bm.grid == cfg.grid) || !(d.xi.grid() == cfg.grid)) {
        throw std::invalid_argument("cameron_martin_fd: grid mismatch");
    }
    const KernelMatrices matrices = build_kernel_matrices(problem.kernel, cfg.grid);
    const double dt = cfg.grid.dt();

    auto shifted_solve = [&](double sign) {
        BrownianPath shifted = bm;
        for (int j = 0; j < cfg.grid.n_steps(); ++j) {
            shifted.increments[static_cast<std::size_t>(j)] += sign * eps * d.xi[j] * dt;
        }
        return picard_solve(problem, shifted, cfg, matrices).path;
    };
    const GridFunction plus = shifted_solve(1.0);
    const GridFunction minus = shifted_solve(-1.0);
    std::vector<double> values(static_cast<std::size_t>(cfg.grid.n_nodes()));
    for (int i = 0; i < cfg.grid.n_nodes(); ++i) {
        values[static_cast<std::size_t>(i)] = (plus[i] - minus[i]) / (2.0 * eps);
    }
    return GridFunction(cfg.grid, std::move(values));
}

}  // namespace volterra
