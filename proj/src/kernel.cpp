#include "volterra/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "volterra/errors.hpp"
#include "volterra/specialfn.hpp"

namespace volterra {

namespace {

// Parameter separations below this leave too few digits after the
// cancellation in the connection-formula prefactors.
constexpr double kMinSeparation = 1e-4;

void check_hurst(double hurst) {
    if (!(hurst > 0.0) || !(hurst < 1.0)) {
        throw std::domain_error("hurst must lie in (0, 1), got " + std::to_string(hurst));
    }
}

double radical_inverse(int index, int base) {
    double value = 0.0;
    double digit = 1.0 / base;
    while (index > 0) {
        value += (index % base) * digit;
        index /= base;
        digit /= base;
    }
    return value;
}

// Cubic spline on uniform knots with not-a-knot ends; exact for cubics and
// O(h^4) for smooth data everywhere, end intervals included.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(double x0, double h, const std::vector<double>& y) : x0_(x0), h_(h), inv_h_(1.0 / h) {
        const int n = static_cast<int>(y.size()) - 1;  // intervals
        if (n < 3) throw std::invalid_argument("CubicSpline: need at least 4 knots");
        std::vector<double> m(static_cast<std::size_t>(n) + 1, 0.0);  // second derivatives
        std::vector<double> d(static_cast<std::size_t>(n), 0.0);
        for (int i = 1; i < n; ++i) {
            d[static_cast<std::size_t>(i)] = (y[static_cast<std::size_t>(i) + 1] -
                                              2.0 * y[static_cast<std::size_t>(i)] +
                                              y[static_cast<std::size_t>(i) - 1]) /
                                             h;
        }
        // With uniform knots the not-a-knot conditions collapse the first and
        // last interior equations to explicit values.
        m[1] = d[1] / h;
        m[static_cast<std::size_t>(n) - 1] = d[static_cast<std::size_t>(n) - 1] / h;
        if (n > 3) {
            // Thomas solve for m[2..n-2].
            const int k = n - 3;  // unknowns
            std::vector<double> diag(static_cast<std::size_t>(k), 2.0 * h / 3.0);
            std::vector<double> rhs(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) {
                rhs[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i) + 2];
            }
            rhs[0] -= h / 6.0 * m[1];
            rhs[static_cast<std::size_t>(k) - 1] -= h / 6.0 * m[static_cast<std::size_t>(n) - 1];
            for (int i = 1; i < k; ++i) {
                const double w = (h / 6.0) / diag[static_cast<std::size_t>(i) - 1];
                diag[static_cast<std::size_t>(i)] -= w * h / 6.0;
                rhs[static_cast<std::size_t>(i)] -= w * rhs[static_cast<std::size_t>(i) - 1];
            }
            m[static_cast<std::size_t>(k) + 1] = rhs[static_cast<std::size_t>(k) - 1] /
                                                 diag[static_cast<std::size_t>(k) - 1];
            for (int i = k - 2; i >= 0; --i) {
                m[static_cast<std::size_t>(i) + 2] =
                    (rhs[static_cast<std::size_t>(i)] -
                     h / 6.0 * m[static_cast<std::size_t>(i) + 3]) /
                    diag[static_cast<std::size_t>(i)];
            }
        }
        m[0] = 2.0 * m[1] - m[2];
        m[static_cast<std::size_t>(n)] =
            2.0 * m[static_cast<std::size_t>(n) - 1] - m[static_cast<std::size_t>(n) - 2];

        a_.resize(static_cast<std::size_t>(n));
        b_.resize(static_cast<std::size_t>(n));
        c_.resize(static_cast<std::size_t>(n));
        e_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            a_[k] = y[k];
            b_[k] = (y[k + 1] - y[k]) / h - h * (2.0 * m[k] + m[k + 1]) / 6.0;
            c_[k] = m[k] / 2.0;
            e_[k] = (m[k + 1] - m[k]) / (6.0 * h);
        }
    }

    double eval(double x) const {
        int k = static_cast<int>((x - x0_) * inv_h_);
        k = std::clamp(k, 0, static_cast<int>(a_.size()) - 1);
        const double u = x - (x0_ + k * h_);
        const std::size_t i = static_cast<std::size_t>(k);
        return a_[i] + u * (b_[i] + u * (c_[i] + u * e_[i]));
    }

    double first_knot_value() const { return a_.front(); }

private:
    double x0_ = 0.0, h_ = 1.0, inv_h_ = 1.0;
    std::vector<double> a_, b_, c_, e_;
};

// Evaluates the smooth hypergeometric factor
//   G(rho) = 2F1(1/2 - H, H - 1/2; H + 1/2; 1 - 1/rho),  rho = s/t in (0, 1),
// either per point or through the split representation
//   G(rho) = rho^(-nu) P(rho) + rho^nu Q(rho),  nu = |H - 1/2|,
// whose factors P, Q are smooth down to rho = 0 and get tabulated once.
class HypFactor {
public:
    explicit HypFactor(double hurst)
        : h_(hurst),
          nu_(std::abs(hurst - 0.5)),
          a_(0.5 - hurst),
          b_(hurst - 0.5),
          c_(hurst + 0.5) {
        const double sep = std::min(2.0 * nu_, 1.0 - 2.0 * nu_);
        if (nu_ == 0.0 || sep < kMinSeparation) return;

        const double A = gamma_fn(c_) * gamma_fn(b_ - a_) / (gamma_fn(b_) * gamma_fn(c_ - a_));
        const double B = gamma_fn(c_) * gamma_fn(a_ - b_) / (gamma_fn(a_) * gamma_fn(c_ - b_));
        const int n_low = 2048;
        const double h_low = kSplit / n_low;
        std::vector<double> pv(n_low + 1), qv(n_low + 1);
        for (int k = 0; k <= n_low; ++k) {
            const double rho = k * h_low;
            const double w = (rho == 0.0) ? 0.0 : -rho / (1.0 - rho);
            const double f1 = hyp2f1(a_, 1.0 - c_ + a_, 1.0 - b_ + a_, w);
            const double f2 = hyp2f1(b_, 1.0 - c_ + b_, 1.0 - a_ + b_, w);
            const double up = std::pow(1.0 - rho, nu_);
            if (h_ > 0.5) {
                pv[static_cast<std::size_t>(k)] = A * up * f1;
                qv[static_cast<std::size_t>(k)] = B / up * f2;
            } else {
                pv[static_cast<std::size_t>(k)] = B * up * f2;
                qv[static_cast<std::size_t>(k)] = A / up * f1;
            }
        }
        p_low_ = CubicSpline(0.0, h_low, pv);
        q_low_ = CubicSpline(0.0, h_low, qv);

        const int n_high = 1024;
        const double h_high = (1.0 - kSplit) / n_high;
        std::vector<double> gv(n_high + 1);
        for (int k = 0; k <= n_high; ++k) {
            const double rho = std::min(kSplit + k * h_high, 1.0);
            gv[static_cast<std::size_t>(k)] =
                (rho >= 1.0) ? 1.0 : hyp2f1(a_, b_, c_, 1.0 - 1.0 / rho);
        }
        g_high_ = CubicSpline(kSplit, h_high, gv);
        tabulated_ = true;
    }

    bool tabulated() const { return tabulated_; }
    double nu() const { return nu_; }

    // Leading coefficient of G at rho -> 0; empty when no table was built.
    std::optional<double> p_zero() const {
        if (tabulated_) return p_low_.first_knot_value();
        return std::nullopt;
    }

    double eval(double rho) const {
        if (nu_ == 0.0) return 1.0;
        if (tabulated_) {
            if (rho >= kSplit) return g_high_.eval(std::min(rho, 1.0));
            const double r = std::pow(rho, -nu_);
            return r * p_low_.eval(rho) + q_low_.eval(rho) / r;
        }
        return hyp2f1(a_, b_, c_, 1.0 - 1.0 / rho);
    }

    // Split-range pieces for the tabulated fast path.
    bool in_low_range(double rho) const { return rho < kSplit; }
    double eval_high(double rho) const { return g_high_.eval(std::min(rho, 1.0)); }
    double eval_low(double rho, double r) const {  // r = rho^(-nu)
        return r * p_low_.eval(rho) + q_low_.eval(rho) / r;
    }

    static constexpr double kSplit = 0.6;

private:
    double h_, nu_, a_, b_, c_;
    bool tabulated_ = false;
    CubicSpline p_low_, q_low_, g_high_;
};

struct FbmEngine {
    double hurst;
    double nu;         // |H - 1/2|
    double hp;         // H + 1/2
    double inv_gamma;  // 1 / Gamma(H + 1/2)
    double det_scale;  // 1 / Gamma(H + 3/2)
    bool is_half;
    Grid grid;
    HypFactor factor;
    std::vector<double> pow_hp;   // (m dt)^(H+1/2)
    std::vector<double> ln_idx;   // log(m), m >= 1
    std::vector<double> ln_half;  // log(j + 1/2)

    FbmEngine(double hurst_, const Grid& grid_)
        : hurst(hurst_),
          nu(std::abs(hurst_ - 0.5)),
          hp(hurst_ + 0.5),
          inv_gamma(1.0),
          det_scale(1.0),
          is_half(hurst_ == 0.5),
          grid(grid_),
          factor(hurst_) {
        if (!is_half) {
            inv_gamma = 1.0 / gamma_fn(hp);
            det_scale = 1.0 / gamma_fn(hp + 1.0);
        }
        const int n = grid.n_steps();
        pow_hp.resize(static_cast<std::size_t>(n) + 1);
        ln_idx.resize(static_cast<std::size_t>(n) + 1);
        ln_half.resize(static_cast<std::size_t>(n));
        for (int m = 0; m <= n; ++m) {
            pow_hp[static_cast<std::size_t>(m)] = std::pow(m * grid.dt(), hp);
            if (m >= 1) ln_idx[static_cast<std::size_t>(m)] = std::log(static_cast<double>(m));
        }
        for (int j = 0; j < n; ++j) {
            ln_half[static_cast<std::size_t>(j)] = std::log(j + 0.5);
        }
    }

    // integral over [sa, sb] of (t - s)^(H - 1/2) G(s/t) ds / Gamma(H + 1/2),
    // with the power factor exact and G frozen at the centroid of the power
    // weight, which keeps the rule exact for G linear in s even against the
    // diagonal singularity.
    double det_piece(double t, double sa, double sb) const {
        const double ta = t - sa, tb = t - sb;
        const double pa = std::pow(ta, hp), pb = std::pow(tb, hp);
        const double w0 = (pa - pb) / hp;
        // Pieces narrow relative to their diagonal distance see an almost
        // constant weight; the plain midpoint avoids the cancellation the
        // centroid formula would hit there.
        double s_freeze = 0.5 * (sa + sb);
        if (ta - tb >= 0.1 * ta) {
            s_freeze = t - (pa * ta - pb * tb) / (hp + 1.0) / w0;
        }
        return inv_gamma * factor.eval(s_freeze / t) * w0;
    }

    // Same for the squared kernel (exponent 2H - 1 integrates to (t-s)^2H / 2H).
    double l2_piece(double t, double sa, double sb) const {
        const double th = 2.0 * hurst;
        const double ta = t - sa, tb = t - sb;
        const double pa = std::pow(ta, th), pb = std::pow(tb, th);
        const double w0 = (pa - pb) / th;
        double s_freeze = 0.5 * (sa + sb);
        if (ta - tb >= 0.1 * ta) {
            s_freeze = t - (pa * ta - pb * tb) / (th + 1.0) / w0;
        }
        const double g = factor.eval(s_freeze / t);
        return inv_gamma * inv_gamma * g * g * w0;
    }

    // Richardson step: the frozen-factor rule has a quadratic error in the
    // piece width, so combining one whole and two half evaluations removes
    // the leading term.
    double det_piece_r(double t, double sa, double sb) const {
        const double sm = 0.5 * (sa + sb);
        return (4.0 * (det_piece(t, sa, sm) + det_piece(t, sm, sb)) - det_piece(t, sa, sb)) / 3.0;
    }

    double l2_piece_r(double t, double sa, double sb) const {
        const double sm = 0.5 * (sa + sb);
        return (4.0 * (l2_piece(t, sa, sm) + l2_piece(t, sm, sb)) - l2_piece(t, sa, sb)) / 3.0;
    }

    // Cell [t_j, t_{j+1}] split into m uniform pieces.
    double det_cell_subdivided(int i, int j, int m) const {
        const double t = grid.node(i);
        const double lo = grid.node(j);
        const double step = grid.dt() / m;
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
            acc += det_piece_r(t, lo + k * step, lo + (k + 1) * step);
        }
        return acc;
    }

    double l2_cell_subdivided(int i, int j, int m) const {
        const double t = grid.node(i);
        const double lo = grid.node(j);
        const double step = grid.dt() / m;
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
            acc += l2_piece_r(t, lo + k * step, lo + (k + 1) * step);
        }
        return acc;
    }

    // First cell [0, t_1]: the s^(-nu) behaviour at the origin calls for a
    // geometric refinement plus a closed-form stub for the remaining sliver.
    template <bool kSquared>
    double first_cell(int i) const {
        const double t = grid.node(i);
        constexpr double q = 0.9;
        constexpr int steps = 160;  // q^160 ~ 5e-8
        double hi = grid.node(1);
        double acc = 0.0;
        double last_g = 1.0, last_rho = 1.0;
        for (int k = 0; k < steps; ++k) {
            const double lo = hi * q;
            last_rho = 0.5 * (lo + hi) / t;
            last_g = factor.eval(last_rho);
            if constexpr (kSquared) {
                acc += l2_piece_r(t, lo, hi);
            } else {
                acc += det_piece_r(t, lo, hi);
            }
            hi = lo;
        }
        // Tail over [0, hi] with G ~ p0 rho^(-nu) and (t - s) ~ t.
        double p0;
        if (auto pz = factor.p_zero(); pz.has_value()) {
            p0 = *pz;
        } else {
            p0 = last_g * std::pow(last_rho, nu);
        }
        if constexpr (kSquared) {
            acc += inv_gamma * inv_gamma * p0 * p0 * std::pow(t, 2.0 * hurst - 1.0 + 2.0 * nu) *
                   std::pow(hi, 1.0 - 2.0 * nu) / (1.0 - 2.0 * nu);
        } else {
            acc += inv_gamma * p0 * std::pow(t, hurst - 0.5 + nu) * std::pow(hi, 1.0 - nu) /
                   (1.0 - nu);
        }
        return acc;
    }

    void fill_det_row(int i, std::span<double> out) const {
        if (is_half) {
            std::fill(out.begin(), out.begin() + i, grid.dt());
            return;
        }
        const double inv_i = 1.0 / i;
        const bool fast = factor.tabulated();
        const int uniform_m = (i <= 8) ? 16 : 8;
        for (int j = 1; j < i - 1; ++j) {
            if (j <= 3 || i <= 8) {
                out[static_cast<std::size_t>(j)] = det_cell_subdivided(i, j, uniform_m);
                continue;
            }
            const double rho = (j + 0.5) * inv_i;
            double g;
            if (fast) {
                if (rho >= HypFactor::kSplit) {
                    g = factor.eval_high(rho);
                } else {
                    const double r = std::exp(-nu * (ln_half[static_cast<std::size_t>(j)] -
                                                     ln_idx[static_cast<std::size_t>(i)]));
                    g = factor.eval_low(rho, r);
                }
            } else {
                g = factor.eval(rho);
            }
            out[static_cast<std::size_t>(j)] =
                det_scale * g *
                (pow_hp[static_cast<std::size_t>(i - j)] - pow_hp[static_cast<std::size_t>(i - j - 1)]);
        }
        out[0] = first_cell<false>(i);
        if (i >= 2) {
            out[static_cast<std::size_t>(i) - 1] =
                det_cell_subdivided(i, i - 1, (i <= 8) ? 16 : 4);
        }
    }

    void fill_sto_row(int i, std::span<double> out) const {
        if (is_half) {
            std::fill(out.begin(), out.begin() + i, 1.0);
            return;
        }
        fill_det_row(i, out);
        const double inv_dt = 1.0 / grid.dt();
        for (int j = 1; j < i - 1; ++j) {
            out[static_cast<std::size_t>(j)] *= inv_dt;
        }
        // End cells carry the bulk of the kernel's variation; matching the
        // cell's L2 mass keeps the variance of the stochastic integral right
        // where a plain average would systematically undershoot it.
        out[0] = std::sqrt(std::max(0.0, first_cell<true>(i)) * inv_dt);
        if (i >= 2) {
            const double l2 = l2_cell_subdivided(i, i - 1, (i <= 8) ? 16 : 4);
            out[static_cast<std::size_t>(i) - 1] = std::sqrt(std::max(0.0, l2) * inv_dt);
        }
    }
};

struct TabulatedEngine {
    TabulatedKernel kernel;
    Grid grid;

    TabulatedEngine(const TabulatedKernel& k, const Grid& g) : kernel(k), grid(g) {
        if (!kernel.fn) {
            throw std::invalid_argument("TabulatedKernel: callback must be set");
        }
        if (!(kernel.singularity_exponent > -0.5) || !(kernel.singularity_exponent <= 0.5)) {
            throw std::invalid_argument("TabulatedKernel: singularity_exponent must lie in (-1/2, 1/2]");
        }
    }

    void fill_row(int i, KernelMode mode, std::span<double> out) const {
        const double t = grid.node(i);
        const double eta = kernel.singularity_exponent;
        const double e1 = eta + 1.0;
        for (int j = 0; j < i; ++j) {
            const double sa = grid.node(j);
            const double sb = grid.node(j + 1);
            const double smid = 0.5 * (sa + sb);
            const double smooth = kernel.fn(t, smid) / std::pow(t - smid, eta);
            double w = smooth * (std::pow(t - sa, e1) - std::pow(t - sb, e1)) / e1;
            if (mode == KernelMode::stochastic) w /= grid.dt();
            out[static_cast<std::size_t>(j)] = w;
        }
    }
};

}  // namespace

double kh_eval(double hurst, double t, double s) {
    check_hurst(hurst);
    if (!(t > 0.0) || t > 1.0) {
        throw std::domain_error("kh_eval: t must lie in (0, 1], got " + std::to_string(t));
    }
    if (!(s > 0.0)) {
        throw std::domain_error("kh_eval: s must be positive, got " + std::to_string(s));
    }
    if (s >= t) return 0.0;
    if (hurst == 0.5) return 1.0;
    const double f = hyp2f1(0.5 - hurst, hurst - 0.5, hurst + 0.5, 1.0 - t / s);
    return std::pow(t - s, hurst - 0.5) / gamma_fn(hurst + 0.5) * f;
}

double g_weight(double hurst, double s) {
    check_hurst(hurst);
    if (!(s > 0.0)) {
        throw std::domain_error("g_weight: s must be positive, got " + std::to_string(s));
    }
    return std::pow(s, std::abs(hurst - 0.5));
}

BoundCheckReport bound_check(double hurst, int samples) {
    check_hurst(hurst);
    if (samples < 100) {
        throw std::invalid_argument("bound_check: need at least 100 samples");
    }
    const double nu = std::abs(hurst - 0.5);
    BoundCheckReport report;
    report.samples = samples;
    for (int k = 1; k <= samples; ++k) {
        const double t = 0.001 + 0.999 * radical_inverse(k, 2);
        const double s = t * (0.001 + 0.998 * radical_inverse(k, 3));
        const double v = kh_eval(hurst, t, s);
        if (v < -1e-12) ++report.violations;
        const double ratio = v * std::pow(t - s, 0.5 - hurst) * std::pow(s, nu);
        report.c_fit = std::max(report.c_fit, ratio);
    }
    return report;
}

KernelMatrix::KernelMatrix(Grid grid, KernelMode mode, std::vector<double> packed)
    : grid_(grid), mode_(mode), packed_(std::move(packed)) {
    const std::size_t n = static_cast<std::size_t>(grid_.n_steps());
    if (packed_.size() != n * (n + 1) / 2) {
        throw std::invalid_argument("KernelMatrix: packed size does not match grid");
    }
}

double KernelMatrix::at(int i, int j) const {
    if (i < 1 || i > grid_.n_steps()) {
        throw std::invalid_argument("KernelMatrix::at: row " + std::to_string(i) + " out of range");
    }
    if (j < 0 || j >= i) return 0.0;
    const std::size_t off = static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) - 1) / 2;
    return packed_[off + static_cast<std::size_t>(j)];
}

std::span<const double> KernelMatrix::row(int i) const {
    if (i < 1 || i > grid_.n_steps()) {
        throw std::invalid_argument("KernelMatrix::row: row " + std::to_string(i) + " out of range");
    }
    const std::size_t off = static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) - 1) / 2;
    return {packed_.data() + off, static_cast<std::size_t>(i)};
}

struct KernelRowBuilder::Impl {
    Grid grid;
    KernelMode mode;
    std::optional<FbmEngine> fbm;
    std::optional<TabulatedEngine> tabulated;
    bool identity = false;

    Impl(const KernelSpec& spec, const Grid& g, KernelMode m) : grid(g), mode(m) {
        if (const auto* fk = std::get_if<FbmKernel>(&spec)) {
            check_hurst(fk->hurst);
            fbm.emplace(fk->hurst, g);
        } else if (const auto* tk = std::get_if<TabulatedKernel>(&spec)) {
            tabulated.emplace(*tk, g);
        } else {
            identity = true;
        }
    }
};

KernelRowBuilder::KernelRowBuilder(const KernelSpec& spec, const Grid& grid, KernelMode mode)
    : impl_(std::make_unique<Impl>(spec, grid, mode)) {}

KernelRowBuilder::~KernelRowBuilder() = default;
KernelRowBuilder::KernelRowBuilder(KernelRowBuilder&&) noexcept = default;
KernelRowBuilder& KernelRowBuilder::operator=(KernelRowBuilder&&) noexcept = default;

const Grid& KernelRowBuilder::grid() const noexcept { return impl_->grid; }
KernelMode KernelRowBuilder::mode() const noexcept { return impl_->mode; }

void KernelRowBuilder::fill_row(int i, std::span<double> out) const {
    if (i < 1 || i > impl_->grid.n_steps()) {
        throw std::invalid_argument("KernelRowBuilder::fill_row: row " + std::to_string(i) +
                                    " out of range");
    }
    if (out.size() < static_cast<std::size_t>(i)) {
        throw std::invalid_argument("KernelRowBuilder::fill_row: output span too small");
    }
    if (impl_->identity) {
        const double v = (impl_->mode == KernelMode::deterministic) ? impl_->grid.dt() : 1.0;
        std::fill(out.begin(), out.begin() + i, v);
        return;
    }
    if (impl_->fbm) {
        if (impl_->mode == KernelMode::deterministic) {
            impl_->fbm->fill_det_row(i, out);
        } else {
            impl_->fbm->fill_sto_row(i, out);
        }
        return;
    }
    impl_->tabulated->fill_row(i, impl_->mode, out);
}

KernelMatrix build_kernel_matrix(const KernelSpec& spec, const Grid& grid, KernelMode mode) {
    KernelRowBuilder builder(spec, grid, mode);
    const std::size_t n = static_cast<std::size_t>(grid.n_steps());
    std::vector<double> packed(n * (n + 1) / 2);
    for (int i = 1; i <= grid.n_steps(); ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) - 1) / 2;
        builder.fill_row(i, {packed.data() + off, static_cast<std::size_t>(i)});
    }
    return KernelMatrix(grid, mode, std::move(packed));
}

}  // namespace volterra
