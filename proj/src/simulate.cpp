#include "volterra/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "volterra/errors.hpp"
#include "volterra/specialfn.hpp"

namespace volterra {

namespace {

// All randomness in the library flows through here: one generator per
// (seed), streams separated by the caller choosing distinct seeds.
std::mt19937_64 make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x9e3779b9u, 0x7f4a7c15u};
    return std::mt19937_64(seq);
}

}  // namespace

GridFunction BrownianPath::cumulative() const {
    std::vector<double> values(static_cast<std::size_t>(grid.n_nodes()), 0.0);
    double acc = 0.0;
    for (int j = 0; j < grid.n_steps(); ++j) {
        acc += increments[static_cast<std::size_t>(j)];
        values[static_cast<std::size_t>(j) + 1] = acc;
    }
    return GridFunction(grid, std::move(values));
}

BrownianPath sample_brownian(const Grid& grid, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(grid.dt()));
    BrownianPath path{grid, std::vector<double>(static_cast<std::size_t>(grid.n_steps())), seed};
    for (auto& dB : path.increments) dB = gauss(rng);
    return path;
}

double v_h(double hurst) {
    if (!(hurst > 0.0) || !(hurst < 1.0)) {
        throw std::invalid_argument("v_h: hurst must lie in (0, 1)");
    }
    if (std::abs(hurst - 0.5) <= 1e-12) return 1.0;
    const double pi = std::acos(-1.0);
    return gamma_fn(2.0 - 2.0 * hurst) * std::cos(pi * hurst) /
           (pi * hurst * (1.0 - 2.0 * hurst));
}

double covariance_rh(double hurst, double s, double t) {
    if (!(s >= 0.0) || !(s <= 1.0) || !(t >= 0.0) || !(t <= 1.0)) {
        throw std::invalid_argument("covariance_rh: arguments must lie in [0, 1]");
    }
    const double v = v_h(hurst);
    const double two_h = 2.0 * hurst;
    return 0.5 * v *
           (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

GridFunction stochastic_convolution(const KernelMatrix& weights, const GridFunction& u,
                                    const BrownianPath& bm) {
    if (weights.mode() != KernelMode::stochastic) {
        throw std::invalid_argument("stochastic_convolution: weights must be stochastic mode");
    }
    if (!(weights.grid() == u.grid()) || !(weights.grid() == bm.grid)) {
        throw std::invalid_argument("stochastic_convolution: grid mismatch");
    }
    const Grid& grid = weights.grid();
    std::vector<double> values(static_cast<std::size_t>(grid.n_nodes()), 0.0);
    for (int i = 1; i < grid.n_nodes(); ++i) {
        auto row = weights.row(i);
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            acc += row[static_cast<std::size_t>(j)] * u[j] * bm.increments[static_cast<std::size_t>(j)];
        }
        values[static_cast<std::size_t>(i)] = acc;
    }
    return GridFunction(grid, std::move(values));
}

GridFunction fbm_from_kernel(const KernelMatrix& weights, const BrownianPath& bm) {
    return stochastic_convolution(
        weights, GridFunction::sample(weights.grid(), [](double) { return 1.0; }), bm);
}

GridFunction fbm_from_kernel(double hurst, const BrownianPath& bm) {
    const KernelMatrix weights =
        build_kernel_matrix(FbmKernel{hurst}, bm.grid, KernelMode::stochastic);
    return fbm_from_kernel(weights, bm);
}

PathEnsemble fbm_ensemble(const FbmKernel& kernel, const Grid& grid, int n_paths,
                          std::uint64_t base_seed) {
    if (n_paths < 1) throw std::invalid_argument("fbm_ensemble: n_paths must be >= 1");
    KernelRowBuilder rows(kernel, grid, KernelMode::stochastic);

    PathEnsemble out;
    out.grid = grid;
    out.label = "fbm-kernel";
    out.paths.reserve(static_cast<std::size_t>(n_paths));
    out.seeds.reserve(static_cast<std::size_t>(n_paths));

    std::vector<BrownianPath> noise;
    noise.reserve(static_cast<std::size_t>(n_paths));
    std::vector<std::vector<double>> values(
        static_cast<std::size_t>(n_paths),
        std::vector<double>(static_cast<std::size_t>(grid.n_nodes()), 0.0));
    for (int p = 0; p < n_paths; ++p) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(p);
        noise.push_back(sample_brownian(grid, seed));
        out.seeds.push_back(seed);
    }

    // One row build serves every path; this keeps the expensive kernel work
    // independent of n_paths.
    std::vector<double> row(static_cast<std::size_t>(grid.n_steps()));
    for (int i = 1; i < grid.n_nodes(); ++i) {
        rows.fill_row(i, std::span<double>(row.data(), static_cast<std::size_t>(i)));
        for (int p = 0; p < n_paths; ++p) {
            const auto& dB = noise[static_cast<std::size_t>(p)].increments;
            double acc = 0.0;
            for (int j = 0; j < i; ++j) acc += row[static_cast<std::size_t>(j)] * dB[static_cast<std::size_t>(j)];
            values[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] = acc;
        }
    }
    for (int p = 0; p < n_paths; ++p) {
        out.paths.emplace_back(grid, std::move(values[static_cast<std::size_t>(p)]));
    }
    return out;
}

struct FbmCholeskySampler::Impl {
    Grid grid{2};
    Eigen::MatrixXd chol;  // lower factor over nodes 1..N
    double jitter = 0.0;
};

FbmCholeskySampler::FbmCholeskySampler(double hurst, const Grid& grid)
    : impl_(std::make_unique<Impl>()) {
    impl_->grid = grid;
    const int n = grid.n_steps();  // node 0 is exactly zero and excluded
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double c = covariance_rh(hurst, grid.node(i + 1), grid.node(j + 1));
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        // Small H at fine grids can push the matrix numerically indefinite.
        const double jitter = 1e-12;
        Eigen::MatrixXd shifted = cov;
        shifted.diagonal().array() += jitter;
        llt.compute(shifted);
        if (llt.info() != Eigen::Success) {
            throw NumericError("fbm_cholesky: covariance factorization failed even with jitter 1e-12");
        }
        impl_->jitter = jitter;
    }
    impl_->chol = llt.matrixL();
}

FbmCholeskySampler::~FbmCholeskySampler() = default;
FbmCholeskySampler::FbmCholeskySampler(FbmCholeskySampler&&) noexcept = default;
FbmCholeskySampler& FbmCholeskySampler::operator=(FbmCholeskySampler&&) noexcept = default;

GridFunction FbmCholeskySampler::sample(std::uint64_t seed) const {
    const Grid& grid = impl_->grid;
    const int n = grid.n_steps();
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = gauss(rng);
    Eigen::VectorXd x = impl_->chol * z;
    std::vector<double> values(static_cast<std::size_t>(grid.n_nodes()), 0.0);
    for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i) + 1] = x(i);
    return GridFunction(grid, std::move(values));
}

double FbmCholeskySampler::jitter() const noexcept { return impl_->jitter; }

GridFunction fbm_cholesky(double hurst, const Grid& grid, std::uint64_t seed) {
    return FbmCholeskySampler(hurst, grid).sample(seed);
}

PathEnsemble cholesky_ensemble(double hurst, const Grid& grid, int n_paths,
                               std::uint64_t base_seed) {
    if (n_paths < 1) throw std::invalid_argument("cholesky_ensemble: n_paths must be >= 1");
    FbmCholeskySampler sampler(hurst, grid);
    PathEnsemble out;
    out.grid = grid;
    out.label = "fbm-cholesky";
    out.paths.reserve(static_cast<std::size_t>(n_paths));
    out.seeds.reserve(static_cast<std::size_t>(n_paths));
    for (int p = 0; p < n_paths; ++p) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(p);
        out.paths.push_back(sampler.sample(seed));
        out.seeds.push_back(seed);
    }
    return out;
}

CovarianceStats ensemble_covariance(const PathEnsemble& ensemble) {
    const int n_paths = static_cast<int>(ensemble.paths.size());
    if (n_paths < 2) {
        throw std::invalid_argument("ensemble_covariance: need at least 2 paths");
    }
    const int n_nodes = ensemble.grid.n_nodes();
    for (const auto& path : ensemble.paths) {
        if (!(path.grid() == ensemble.grid)) {
            throw std::invalid_argument("ensemble_covariance: path grid mismatch");
        }
    }

    std::vector<double> mean(static_cast<std::size_t>(n_nodes), 0.0);
    for (const auto& path : ensemble.paths) {
        for (int i = 0; i < n_nodes; ++i) mean[static_cast<std::size_t>(i)] += path[i];
    }
    for (auto& m : mean) m /= n_paths;

    CovarianceStats stats;
    stats.n_nodes = n_nodes;
    stats.n_paths = n_paths;
    stats.cov.assign(static_cast<std::size_t>(n_nodes) * n_nodes, 0.0);
    stats.se.assign(static_cast<std::size_t>(n_nodes) * n_nodes, 0.0);

    std::vector<double> dev(static_cast<std::size_t>(n_nodes));
    for (const auto& path : ensemble.paths) {
        for (int i = 0; i < n_nodes; ++i) dev[static_cast<std::size_t>(i)] = path[i] - mean[static_cast<std::size_t>(i)];
        for (int i = 0; i < n_nodes; ++i) {
            const double di = dev[static_cast<std::size_t>(i)];
            auto* row = stats.cov.data() + static_cast<std::size_t>(i) * n_nodes;
            for (int j = 0; j <= i; ++j) row[j] += di * dev[static_cast<std::size_t>(j)];
        }
    }
    for (int i = 0; i < n_nodes; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double c = stats.cov[static_cast<std::size_t>(i) * n_nodes + j] / (n_paths - 1);
            stats.cov[static_cast<std::size_t>(i) * n_nodes + j] = c;
            stats.cov[static_cast<std::size_t>(j) * n_nodes + i] = c;
        }
    }
    for (int i = 0; i < n_nodes; ++i) {
        const double cii = stats.cov_at(i, i);
        for (int j = 0; j <= i; ++j) {
            const double cij = stats.cov_at(i, j);
            const double cjj = stats.cov_at(j, j);
            // Gaussian sampling variance of an (n-1)-normalized covariance entry.
            const double se = std::sqrt(std::max(0.0, (cii * cjj + cij * cij) / (n_paths - 1)));
            stats.se[static_cast<std::size_t>(i) * n_nodes + j] = se;
            stats.se[static_cast<std::size_t>(j) * n_nodes + i] = se;
        }
    }
    return stats;
}

}  // namespace volterra
