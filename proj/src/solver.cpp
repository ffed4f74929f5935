#include "volterra/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "volterra/errors.hpp"

namespace volterra {

namespace {

void validate_problem(const SdeProblem& problem) {
    if (!problem.b) throw std::invalid_argument("picard_solve: drift callback is null");
    if (!problem.sigma) throw std::invalid_argument("picard_solve: diffusion callback is null");
    if (!(problem.lipschitz_hint > 0.0)) {
        throw std::invalid_argument("picard_solve: lipschitz_hint must be positive");
    }
    if (!std::isfinite(problem.x0)) {
        throw std::invalid_argument("picard_solve: initial condition must be finite");
    }
}

void validate_config(const SolverConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver config: tol must be positive");
    if (cfg.max_picard_iters < 1) {
        throw std::invalid_argument("solver config: max_picard_iters must be >= 1");
    }
    if (!(cfg.r_exponent > 2.0)) {
        throw std::invalid_argument("solver config: r_exponent must exceed 2");
    }
}

}  // namespace

double default_r_exponent(const KernelSpec& spec) {
    if (const auto* fbm = std::get_if<FbmKernel>(&spec)) {
        return std::max(2.0, 1.0 / fbm->hurst) + 0.1;
    }
    return 2.1;
}

KernelMatrices build_kernel_matrices(const KernelSpec& spec, const Grid& grid) {
    return KernelMatrices{build_kernel_matrix(spec, grid, KernelMode::deterministic),
                          build_kernel_matrix(spec, grid, KernelMode::stochastic)};
}

PicardResult picard_solve(const SdeProblem& problem, const BrownianPath& bm,
                          const SolverConfig& cfg) {
    return picard_solve(problem, bm, cfg, build_kernel_matrices(problem.kernel, cfg.grid));
}

PicardResult picard_solve(const SdeProblem& problem, const BrownianPath& bm,
                          const SolverConfig& cfg, const KernelMatrices& matrices) {
    validate_problem(problem);
    validate_config(cfg);
    const Grid& grid = cfg.grid;
    if (!(bm.grid == grid) || !(matrices.det.grid() == grid) || !(matrices.sto.grid() == grid)) {
        throw std::invalid_argument("picard_solve: grid mismatch");
    }
    if (matrices.det.mode() != KernelMode::deterministic ||
        matrices.sto.mode() != KernelMode::stochastic) {
        throw std::invalid_argument("picard_solve: matrices carry the wrong modes");
    }

    const int n_nodes = grid.n_nodes();
    const int n_steps = grid.n_steps();
    std::vector<double> prev(static_cast<std::size_t>(n_nodes), problem.x0);
    std::vector<double> next(static_cast<std::size_t>(n_nodes), problem.x0);
    std::vector<double> bvals(static_cast<std::size_t>(n_steps));
    std::vector<double> svals(static_cast<std::size_t>(n_steps));

    PicardResult result{GridFunction::zeros(grid), 0, 0.0, {}};
    for (int iter = 1; iter <= cfg.max_picard_iters; ++iter) {
        for (int j = 0; j < n_steps; ++j) {
            const double t = grid.node(j);
            const double x = prev[static_cast<std::size_t>(j)];
            bvals[static_cast<std::size_t>(j)] = problem.b(t, x);
            svals[static_cast<std::size_t>(j)] =
                problem.sigma(t, x) * bm.increments[static_cast<std::size_t>(j)];
            if (!std::isfinite(bvals[static_cast<std::size_t>(j)]) ||
                !std::isfinite(svals[static_cast<std::size_t>(j)])) {
                throw NumericError("picard_solve: coefficient evaluation is not finite at t = " +
                                   std::to_string(t));
            }
        }
        double delta = 0.0;
        for (int i = 1; i < n_nodes; ++i) {
            auto wd = matrices.det.row(i);
            auto ws = matrices.sto.row(i);
            double acc = problem.x0;
            for (int j = 0; j < i; ++j) {
                acc += wd[static_cast<std::size_t>(j)] * bvals[static_cast<std::size_t>(j)] +
                       ws[static_cast<std::size_t>(j)] * svals[static_cast<std::size_t>(j)];
            }
            next[static_cast<std::size_t>(i)] = acc;
            delta = std::max(delta, std::abs(acc - prev[static_cast<std::size_t>(i)]));
        }
        result.deltas.push_back(delta);
        result.iters = iter;
        result.final_delta = delta;
        std::swap(prev, next);
        if (!std::isfinite(delta)) {
            throw NumericError("picard_solve: iteration diverged to non-finite values");
        }
        if (delta < cfg.tol) {
            result.path = GridFunction(grid, std::move(prev));
            return result;
        }
    }
    throw ConvergenceError("picard_solve: no convergence within " +
                               std::to_string(cfg.max_picard_iters) + " sweeps, last delta " +
                               std::to_string(result.final_delta),
                           result.deltas);
}

EnsembleSolveResult solve_ensemble(const SdeProblem& problem, int n_paths,
                                   std::uint64_t base_seed, const SolverConfig& cfg) {
    if (n_paths < 1) throw std::invalid_argument("solve_ensemble: n_paths must be >= 1");
    validate_problem(problem);
    validate_config(cfg);
    const KernelMatrices matrices = build_kernel_matrices(problem.kernel, cfg.grid);

    EnsembleSolveResult out;
    out.ensemble.grid = cfg.grid;
    out.ensemble.label = "picard";
    std::vector<std::uint64_t> failing;
    std::vector<double> first_failure_deltas;
    for (int p = 0; p < n_paths; ++p) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(p);
        const BrownianPath bm = sample_brownian(cfg.grid, seed);
        try {
            PicardResult res = picard_solve(problem, bm, cfg, matrices);
            out.ensemble.paths.push_back(std::move(res.path));
            out.ensemble.seeds.push_back(seed);
            out.iters.push_back(res.iters);
            out.final_deltas.push_back(res.final_delta);
        } catch (const ConvergenceError& err) {
            if (failing.empty()) first_failure_deltas = err.deltas();
            failing.push_back(seed);
        }
    }
    if (!failing.empty()) {
        std::string msg = "solve_ensemble: convergence failed for seeds";
        for (std::uint64_t seed : failing) msg += " " + std::to_string(seed);
        throw ConvergenceError(msg, first_failure_deltas);
    }
    return out;
}

SensitivityResult initial_condition_sensitivity(const SdeProblem& problem,
                                                const std::vector<double>& x_values,
                                                const BrownianPath& bm,
                                                const SolverConfig& cfg) {
    if (x_values.size() < 2) {
        throw std::invalid_argument("initial_condition_sensitivity: need at least 2 values");
    }
    const KernelMatrices matrices = build_kernel_matrices(problem.kernel, cfg.grid);
    SensitivityResult out;
    out.x_values = x_values;
    out.paths.reserve(x_values.size());
    for (double x : x_values) {
        SdeProblem shifted = problem;
        shifted.x0 = x;
        out.paths.push_back(picard_solve(shifted, bm, cfg, matrices).path);
    }
    const std::size_t n = x_values.size();
    out.pairwise.assign(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d = out.paths[a].sup_distance(out.paths[b]);
            out.pairwise[a * n + b] = d;
            out.pairwise[b * n + a] = d;
        }
    }
    return out;
}

}  // namespace volterra
