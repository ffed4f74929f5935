#include "volterra/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <vector>

#include "json.hpp"
#include "volterra/acceptance.hpp"
#include "volterra/errors.hpp"
#include "volterra/export.hpp"
#include "volterra/fraccalc.hpp"
#include "volterra/malliavin.hpp"
#include "volterra/simulate.hpp"

namespace volterra {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json config_echo(const RunConfig& config) {
    return json{{"command", command_name(config.command)},
                {"H", config.H},
                {"N", config.N},
                {"n_paths", config.n_paths},
                {"seed", config.seed},
                {"tol", config.tol},
                {"output_path", config.output_path},
                {"format", format_name(config.format)}};
}

void write_json(const fs::path& path, const json& doc) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
}

// Every command ends here: hash the data files and record them next to the
// echoed configuration.
void write_manifest(const fs::path& dir, const RunConfig& config,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& files) {
    json doc;
    doc["config"] = config_echo(config);
    doc["library_version"] = kLibraryVersion;
    doc["seeds"] = seeds;
    json listed = json::array();
    for (const auto& entry : collect_entries(dir, files)) {
        listed.push_back(
            {{"name", entry.name}, {"bytes", entry.bytes}, {"fnv1a64", entry.fnv1a64}});
    }
    doc["files"] = listed;
    write_json(dir / "manifest.json", doc);
}

std::string ensemble_file(const RunConfig& config, const char* stem) {
    return std::string(stem) + (config.format == OutputFormat::csv ? ".csv" : ".json");
}

void write_ensemble(const fs::path& dir, const RunConfig& config, const char* stem,
                    const PathEnsemble& ensemble) {
    const fs::path file = dir / ensemble_file(config, stem);
    if (config.format == OutputFormat::csv) {
        write_ensemble_csv(file, ensemble);
    } else {
        write_ensemble_json(file, ensemble);
    }
}

int run_fbm(const RunConfig& config) {
    const fs::path dir(config.output_path);
    const Grid grid(config.N);
    const PathEnsemble ens = fbm_ensemble(FbmKernel{config.H}, grid, config.n_paths, config.seed);
    write_ensemble(dir, config, "paths", ens);
    write_manifest(dir, config, ens.seeds, {ensemble_file(config, "paths")});
    return 0;
}

int run_solve(const RunConfig& config) {
    const fs::path dir(config.output_path);
    const Grid grid(config.N);
    const SdeProblem problem = demo_problem(FbmKernel{config.H});
    const SolverConfig cfg{grid, config.tol, 50, default_r_exponent(problem.kernel)};
    const EnsembleSolveResult res = solve_ensemble(problem, config.n_paths, config.seed, cfg);
    write_ensemble(dir, config, "paths", res.ensemble);

    json diag;
    diag["iterations"] = res.iters;
    diag["final_deltas"] = res.final_deltas;
    diag["max_iterations"] = *std::max_element(res.iters.begin(), res.iters.end());
    write_json(dir / "diagnostics.json", diag);
    write_manifest(dir, config, res.ensemble.seeds,
                   {ensemble_file(config, "paths"), "diagnostics.json"});
    return 0;
}

int run_malliavin(const RunConfig& config) {
    const fs::path dir(config.output_path);
    const Grid grid(config.N);
    const SdeProblem problem = demo_problem(FbmKernel{config.H});
    const SolverConfig cfg{grid, config.tol, 80, default_r_exponent(problem.kernel)};
    const KernelMatrices matrices = build_kernel_matrices(problem.kernel, grid);
    const BrownianPath bm = sample_brownian(grid, config.seed);
    const PicardResult X = picard_solve(problem, bm, cfg, matrices);
    const Direction d{demo_direction(grid)};

    const GridFunction y_lin = derivative_linear_solve(problem, X.path, bm, d, cfg, matrices);
    const TriangularArray v0 = hypothesis_b_v0(problem.kernel, grid);
    const VariationKernel lk =
        variation_series(problem, X.path, bm, v0, cfg, matrices, 25, 1e-10);
    const GridFunction y_var = parameter_variation(lk, problem, X.path, d);
    const GridFunction fd = cameron_martin_fd(problem, bm, d, 1e-4, cfg);

    write_columns_csv(dir / "derivative.csv", grid, {"linear", "variation", "fd"},
                      {&y_lin, &y_var, &fd});
    json report;
    report["sup_linear_vs_variation"] = y_lin.sup_distance(y_var);
    report["sup_linear_vs_fd"] = y_lin.sup_distance(fd);
    report["sup_variation_vs_fd"] = y_var.sup_distance(fd);
    report["series_terms_used"] = lk.terms_used;
    report["series_tail_norm"] = lk.tail_norm;
    report["series_tail_norms"] = lk.tail_norms;
    report["direction_h0_norm"] =
        direction_h0_norm(problem.kernel, grid, d, cfg.r_exponent);
    write_json(dir / "consistency.json", report);
    write_manifest(dir, config, {config.seed}, {"derivative.csv", "consistency.json"});
    return 0;
}

int run_verify_cov(const RunConfig& config) {
    const fs::path dir(config.output_path);
    const Grid grid(config.N);
    const PathEnsemble ens = fbm_ensemble(FbmKernel{config.H}, grid, config.n_paths, config.seed);
    const CovarianceStats stats = ensemble_covariance(ens);

    double max_abs = 0.0, max_se_units = 0.0;
    int violations = 0;
    for (int i = 1; i < grid.n_nodes(); ++i) {
        for (int j = 1; j <= i; ++j) {
            const double target = covariance_rh(config.H, grid.node(i), grid.node(j));
            const double err = std::abs(stats.cov_at(i, j) - target);
            max_abs = std::max(max_abs, err);
            if (stats.se_at(i, j) > 0.0) {
                max_se_units = std::max(max_se_units, err / stats.se_at(i, j));
            }
            if (err > 4.0 * stats.se_at(i, j) + 0.03 * std::abs(target)) ++violations;
        }
    }
    json report;
    report["H"] = config.H;
    report["N"] = config.N;
    report["n_paths"] = config.n_paths;
    report["max_abs_error"] = max_abs;
    report["max_se_units"] = max_se_units;
    report["violations"] = violations;
    report["pass"] = violations == 0;
    write_json(dir / "covariance.json", report);
    write_manifest(dir, config, ens.seeds, {"covariance.json"});
    return report["pass"].get<bool>() ? 0 : 1;
}

int run_holder(const RunConfig& config) {
    const fs::path dir(config.output_path);
    const Grid grid(config.N);
    const PathEnsemble ens = fbm_ensemble(FbmKernel{config.H}, grid, config.n_paths, config.seed);
    const std::vector<int> scales = default_holder_scales(config.N);
    std::vector<double> slopes;
    slopes.reserve(ens.paths.size());
    for (const auto& path : ens.paths) slopes.push_back(estimate_holder_exponent(path, scales));
    std::vector<double> sorted = slopes;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1
                              ? sorted[mid]
                              : 0.5 * (sorted[mid - 1] + sorted[mid]);

    json report;
    report["H"] = config.H;
    report["N"] = config.N;
    report["n_paths"] = config.n_paths;
    report["scales"] = scales;
    report["slopes"] = slopes;
    report["median_slope"] = median;
    report["median_error"] = std::abs(median - config.H);
    write_json(dir / "holder.json", report);
    write_manifest(dir, config, ens.seeds, {"holder.json"});
    return 0;
}

int run_kernel_dump(const RunConfig& config) {
    const fs::path dir(config.output_path);
    const Grid grid(config.N);
    const KernelMatrices m = build_kernel_matrices(FbmKernel{config.H}, grid);
    fs::create_directories(dir);
    std::ofstream out(dir / "kernel.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open kernel.csv for writing");
    out << "i,j,t_i,t_j,det_weight,sto_weight\n";
    for (int i = 1; i < grid.n_nodes(); ++i) {
        for (int j = 0; j < i; ++j) {
            out << i << ',' << j << ',' << format_double(grid.node(i)) << ','
                << format_double(grid.node(j)) << ',' << format_double(m.det.at(i, j)) << ','
                << format_double(m.sto.at(i, j)) << '\n';
        }
    }
    out.close();
    write_manifest(dir, config, {}, {"kernel.csv"});
    return 0;
}

}  // namespace

SdeProblem demo_problem(const KernelSpec& kernel) {
    SdeProblem p;
    p.x0 = 1.0;
    p.b = [](double, double x) { return -x; };
    p.sigma = [](double, double x) { return 0.5 / std::sqrt(1.0 + x * x); };
    p.db_dx = [](double, double) { return -1.0; };
    p.dsigma_dx = [](double, double x) {
        const double w = 1.0 + x * x;
        return -0.5 * x / (w * std::sqrt(w));
    };
    p.lipschitz_hint = 1.0;
    p.kernel = kernel;
    return p;
}

GridFunction demo_direction(const Grid& grid) {
    return GridFunction::sample(
        grid, [](double t) { return 1.0 + 0.5 * std::sin(3.0 * t) + t * t; });
}

int run(const RunConfig& config) {
    validate_config(config);
    try {
        switch (config.command) {
            case Command::fbm: return run_fbm(config);
            case Command::solve: return run_solve(config);
            case Command::malliavin: return run_malliavin(config);
            case Command::verify_cov: return run_verify_cov(config);
            case Command::holder: return run_holder(config);
            case Command::kernel_dump: return run_kernel_dump(config);
            case Command::acceptance:
                return run_acceptance(fs::path(config.output_path), config.seed);
        }
        return 2;
    } catch (const NumericError& err) {
        json diag;
        diag["error"] = "numeric";
        diag["what"] = err.what();
        diag["config"] = config_echo(config);
        if (const auto* conv = dynamic_cast<const ConvergenceError*>(&err)) {
            diag["deltas"] = conv->deltas();
        }
        write_json(fs::path(config.output_path) / "error.json", diag);
        std::cerr << "numeric failure: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace volterra
