#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "mdv/density_estimate.hpp"
#include "mdv/errors.hpp"
#include "mdv/levy.hpp"
#include "mdv/mellin.hpp"
#include "mdv/quadrature.hpp"
#include "mdv/sample_set.hpp"
#include "mdv/special_functions.hpp"

namespace mdv {

// Estimator settings for samples of a stopped Levy process X = L_T.
struct GsseConfig {
    double gamma_line = 0.7;  // inversion line, in (1/2, 1)
    double beta = M_PI_2;
    double epsilon = 0.5;  // Fourier-integrability margin of the data density
    SmoothnessMode mode = SmoothnessMode::exp_decay;
    double a_multiplier = 1.0;  // scales the Laplace-domain cutoff A_n
    double u_multiplier = 1.0;  // scales the Mellin-line cutoff U_n
    std::size_t n = 0;
    bool clip_nonnegative = false;

    void validate() const {
        if (!(gamma_line > 0.5 && gamma_line < 1.0))
            throw DomainError("GsseConfig: gamma_line must lie in (1/2, 1)");
        if (!(beta > 0.0)) throw DomainError("GsseConfig: beta must be positive");
        if (!(epsilon > 0.0)) throw DomainError("GsseConfig: epsilon must be positive");
        if (!(a_multiplier > 0.0) || !(u_multiplier > 0.0))
            throw DomainError("GsseConfig: cutoff multipliers must be positive");
    }
};

struct Cutoffs {
    double a_n = 0.0;  // truncation of the Laplace-domain integral
    double u_n = 0.0;  // truncation of the inversion line
};

// A_n = a n^{1/(4(1-gamma) + 2 eps)};
// exp-decay: U_n = u [ eps/((2-2gamma+eps)(2beta+pi)) log n - (2gamma-1)/(2beta+pi) loglog n ]
// poly-decay: U_n = u [ eps/(pi(2-2gamma+eps)) log n - (2beta+2gamma-1)/pi loglog n ]
inline Cutoffs cutoffs(const GsseConfig& cfg) {
    cfg.validate();
    if (cfg.n < 3) throw DomainError("cutoffs: requires n >= 3");
    const double ln = std::log(static_cast<double>(cfg.n));
    const double lln = std::log(ln);
    const double g = cfg.gamma_line, e = cfg.epsilon, b = cfg.beta;
    Cutoffs c;
    c.a_n = cfg.a_multiplier * std::pow(static_cast<double>(cfg.n), 1.0 / (4.0 * (1.0 - g) + 2.0 * e));
    double u = 0.0;
    if (cfg.mode == SmoothnessMode::exp_decay)
        u = e / ((2.0 - 2.0 * g + e) * (2.0 * b + M_PI)) * ln -
            (2.0 * g - 1.0) / (2.0 * b + M_PI) * lln;
    else
        u = e / (M_PI * (2.0 - 2.0 * g + e)) * ln - (2.0 * b + 2.0 * g - 1.0) / M_PI * lln;
    c.u_n = cfg.u_multiplier * u;
    if (!(c.u_n > 0.0)) throw DomainError("cutoffs: U_n <= 0, n too small for these parameters");
    return c;
}

// Quadrature layout for the Laplace-domain integrals. osc_scale bounds the
// frequency of e^{i x lambda} the panels must resolve; negative means derive
// it from the data. Fixing it explicitly makes the lambda grid independent of
// the sample, which in turn makes the estimator exactly linear in samples.
struct PhiQuadrature {
    double osc_scale = -1.0;
    double panel_cap = 0.5;
    int order = 8;
    double head_delta = 1e-8;  // [0, delta] handled by the analytic leading term
    bool verify = false;       // stable models: cross-check closed form vs quadrature
};

namespace detail {

// panel boundaries on [delta, a_n]: geometric from delta up to the regular
// width, then uniform; resolves both the lambda ~ 0 power singularity and the
// e^{i x lambda} oscillation
inline std::vector<double> phi_panel_edges(double delta, double a_n, double width) {
    std::vector<double> edges;
    edges.push_back(delta);
    double w = delta;
    while (w * 2.0 < width && edges.back() * 2.0 < a_n) {
        edges.push_back(edges.back() * 2.0);
        w = edges.back();
    }
    double lo = edges.back();
    const std::size_t panels =
        lo < a_n ? static_cast<std::size_t>(std::ceil((a_n - lo) / width)) : 0;
    const double step = panels ? (a_n - lo) / static_cast<double>(panels) : 0.0;
    for (std::size_t p = 1; p <= panels; ++p) edges.push_back(lo + step * static_cast<double>(p));
    edges.back() = a_n;
    return edges;
}

struct LambdaGrid {
    std::vector<double> lambda;
    std::vector<double> weight;
    double delta = 0.0;

    LambdaGrid(double a_n, double osc_scale, const PhiQuadrature& q) {
        delta = std::min(q.head_delta, 0.01 * a_n);
        const double width = std::min(q.panel_cap, M_PI / (1.0 + osc_scale));
        const auto edges = phi_panel_edges(delta, a_n, width);
        const auto& rule = gauss_legendre(q.order);
        lambda.reserve((edges.size() - 1) * rule.nodes.size());
        weight.reserve(lambda.capacity());
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double mid = 0.5 * (edges[p] + edges[p + 1]);
            const double half = 0.5 * (edges[p + 1] - edges[p]);
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                lambda.push_back(mid + half * rule.nodes[j]);
                weight.push_back(half * rule.weights[j]);
            }
        }
    }
};

inline void branch_guard(cplx psi_val) {
    if (psi_val.real() < 0.0 && std::abs(psi_val.imag()) <= 1e-15 * std::abs(psi_val.real()))
        throw BranchError("phi_n: psi reached the negative real axis");
}

// bit-exactly mirrored nodes on [-cutoff, cutoff], so node i and N-1-i are
// exact negations and Hermitian pairing is well defined
inline CompositeNodes mirrored_line_nodes(double cutoff, double panel_width, int order) {
    const CompositeNodes half = composite_gauss_nodes(0.0, cutoff, panel_width, order);
    CompositeNodes out;
    out.x.resize(2 * half.x.size());
    out.w.resize(2 * half.w.size());
    const std::size_t n = half.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        out.x[n - 1 - i] = -half.x[i];
        out.w[n - 1 - i] = half.w[i];
        out.x[n + i] = half.x[i];
        out.w[n + i] = half.w[i];
    }
    return out;
}

}  // namespace detail

// Phi_n(z, x) = int_0^{A_n} psi(lambda)^{z-1} e^{i x lambda} psi'(lambda) dlambda.
// Principal powers are safe because Re psi >= 0 keeps psi out of the cut.
// Stable models use the closed form A_n^{alpha z}/z * 1F1(alpha z; 1+alpha z; i A_n x).
inline cplx phi_n(const LevyModel& model, cplx z, double x, double a_n,
                  const PhiQuadrature& quad = {}) {
    if (!(z.real() > 0.0 && z.real() < 1.0)) throw DomainError("phi_n: requires Re z in (0,1)");
    if (!(a_n > 0.0)) throw DomainError("phi_n: requires A_n > 0");

    auto closed_form = [&]() {
        const double alpha = model.stable_alpha();
        const cplx az = alpha * z;
        return std::exp(az * std::log(a_n)) / z *
               kummer_1f1(az, az + 1.0, cplx(0.0, a_n * x));
    };
    const bool stable = model.kind() == LevyModel::Kind::stable;
    if (stable && !quad.verify) return closed_form();

    PhiQuadrature q = quad;
    if (q.osc_scale < 0.0) q.osc_scale = std::abs(x);
    // per-sample evaluation follows the conservative quarter-oscillation rule
    q.panel_cap = std::min(q.panel_cap, M_PI / (4.0 * (1.0 + std::abs(x))));
    const detail::LambdaGrid grid(a_n, q.osc_scale, q);

    // analytic head: int_0^delta psi^{z-1} psi' dlambda = psi(delta)^z / z
    const cplx psi_delta = model.psi(grid.delta);
    detail::branch_guard(psi_delta);
    cplx acc = std::exp(z * std::log(psi_delta)) / z;
    for (std::size_t j = 0; j < grid.lambda.size(); ++j) {
        const double lam = grid.lambda[j];
        const cplx p = model.psi(lam);
        detail::branch_guard(p);
        acc += grid.weight[j] * std::exp((z - 1.0) * std::log(p) + cplx(0.0, x * lam)) *
               model.psi_prime(lam);
    }
    if (stable) {
        const cplx cf = closed_form();
        if (std::abs(cf - acc) > 1e-6 * std::max(1.0, std::abs(cf)))
            throw QuadratureError("phi_n: stable closed form and quadrature disagree");
        return cf;
    }
    return acc;
}

// Generalized estimator
//   p_{T,n}(x) = (1/2 pi n) sum_k int_{-U_n}^{U_n}
//                Phi_n(1-gamma-iv, X_k) / Gamma(1-gamma-iv) x^{-gamma-iv} dv,
// evaluated through the empirical characteristic function on a shared lambda
// grid. With variance_reduction the integrand is recentred around the
// deterministic-time proxy exp(-m_n psi), whose Mellin transform
// m_n^{z-1} Gamma(1-z) is added back in closed form; the dropped remainder is
// reported through params["remainder_bound"].
inline DensityEstimate estimate_gsse(const SampleSet& samples, const LevyModel& model,
                                     const GsseConfig& config, std::span<const double> x_grid,
                                     bool variance_reduction = false,
                                     const PhiQuadrature& quad = {},
                                     const Cutoffs* explicit_cutoffs = nullptr) {
    config.validate();
    samples.validate();
    GsseConfig cfg = config;
    if (cfg.n == 0) cfg.n = samples.size();
    const Cutoffs cut = explicit_cutoffs ? *explicit_cutoffs : cutoffs(cfg);
    if (cut.u_n == 0.0 || cut.a_n == 0.0) {
        DensityEstimate zero;
        zero.route = variance_reduction ? "gsse-decomposed" : "gsse";
        zero.x_grid.assign(x_grid.begin(), x_grid.end());
        zero.values.assign(x_grid.size(), 0.0);
        zero.params = {{"gamma", cfg.gamma_line}, {"A_n", cut.a_n}, {"U_n", cut.u_n}};
        return zero;
    }

    {
        // sector condition diagnostic over (0, max(A_n, 100)]
        std::vector<double> ugrid;
        const double top = std::max(cut.a_n, 100.0);
        for (int i = 1; i <= 64; ++i) ugrid.push_back(top * i / 64.0);
        const ContourReport rep = contour_condition_check(model, ugrid);
        if (rep.condition_violated)
            throw ModelError("estimate_gsse: contour condition violated for " + model.describe());
    }

    double m_n = 0.0;
    for (double v : samples.values) m_n += v;
    m_n /= static_cast<double>(samples.size());
    if (variance_reduction && !(m_n > 0.0))
        throw ConfigError("estimate_gsse: variance reduction requires positive sample mean");

    PhiQuadrature q = quad;
    if (q.osc_scale < 0.0) {
        // resolve e^{i lambda X_k} for all but the extreme tail of the sample;
        // an under-resolved outlier perturbs the empirical characteristic
        // function at the 1/n level while keeping the grid size bounded
        std::vector<double> mags(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) mags[i] = std::abs(samples.values[i]);
        std::sort(mags.begin(), mags.end());
        const double top = mags.back();
        const double q995 = mags[static_cast<std::size_t>(0.995 * (mags.size() - 1))];
        q.osc_scale = std::min(top, 2.0 * q995 + 1.0);
    }
    const detail::LambdaGrid grid(cut.a_n, q.osc_scale, q);

    // per-node model data and empirical characteristic function
    const std::size_t m = grid.lambda.size();
    std::vector<cplx> log_psi(m), psi_prime(m), w_ecf(m);
    for (std::size_t j = 0; j < m; ++j) {
        const cplx p = model.psi(grid.lambda[j]);
        detail::branch_guard(p);
        log_psi[j] = std::log(p);
        psi_prime[j] = model.psi_prime(grid.lambda[j]);
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double lam = grid.lambda[j];
        double cr = 0.0, ci = 0.0;
        for (double xv : samples.values) {
            cr += std::cos(lam * xv);
            ci += std::sin(lam * xv);
        }
        w_ecf[j] = cplx(cr * inv_n, ci * inv_n);
        if (variance_reduction) w_ecf[j] -= std::exp(-m_n * std::exp(log_psi[j]));
    }

    // inversion-line nodes
    const CompositeNodes vline =
        detail::mirrored_line_nodes(cut.u_n, std::min(0.5, cut.u_n / 2.0), 16);
    const cplx psi_delta = model.psi(grid.delta);
    detail::branch_guard(psi_delta);
    const cplx log_psi_delta = std::log(psi_delta);
    const double log_mn = variance_reduction ? std::log(m_n) : 0.0;

    std::vector<cplx> coeff(vline.x.size());
    double l1 = 0.0;
    for (std::size_t i = 0; i < vline.x.size(); ++i) {
        const cplx z(cfg.gamma_line, vline.x[i]);
        cplx inner(0.0, 0.0);
        for (std::size_t j = 0; j < m; ++j)
            inner += grid.weight[j] * std::exp(-z * log_psi[j]) * w_ecf[j] * psi_prime[j];
        if (!variance_reduction) {
            // analytic head of the lambda integral, e^{i x lambda} ~ 1 there
            inner += std::exp((1.0 - z) * log_psi_delta) / (1.0 - z);
        }
        cplx val = inner * recip_gamma(1.0 - z);
        if (variance_reduction) val += std::exp((z - 1.0) * log_mn);
        coeff[i] = vline.w[i] * val;
        l1 += std::abs(coeff[i]);
    }

    // The empirical characteristic function is Hermitian only in expectation,
    // so the raw estimate carries an O(n^{-1/2}) imaginary component. Keeping
    // the Hermitian part of the coefficients is the same as taking the real
    // part of the estimate, which can only reduce the loss against a real
    // density; the discarded asymmetry is reported for diagnostics.
    double defect = 0.0;
    const std::size_t nn = coeff.size();
    for (std::size_t i = 0; i < nn / 2; ++i) {
        const std::size_t mir = nn - 1 - i;
        const cplx sym = 0.5 * (coeff[i] + std::conj(coeff[mir]));
        defect = std::max(defect, std::abs(coeff[i] - std::conj(coeff[mir])));
        coeff[i] = sym;
        coeff[mir] = std::conj(sym);
    }

    DensityEstimate est;
    est.route = variance_reduction ? "gsse-decomposed" : "gsse";
    est.x_grid.assign(x_grid.begin(), x_grid.end());
    est.values.resize(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        if (!(x > 0.0)) throw DomainError("estimate_gsse: grid requires x > 0");
        const double lx = std::log(x);
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < coeff.size(); ++j) {
            const double phase = -vline.x[j] * lx;
            acc += coeff[j] * cplx(std::cos(phase), std::sin(phase));
        }
        acc *= std::exp(-cfg.gamma_line * lx) / (2.0 * M_PI);
        const double scale = l1 * std::exp(-cfg.gamma_line * lx) / (2.0 * M_PI);
        if (std::abs(acc.imag()) > 1e-6 * std::max(scale, 1e-300))
            throw QuadratureError("estimate_gsse: Hermitian symmetry residue too large");
        est.values[i] = cfg.clip_nonnegative ? std::max(0.0, acc.real()) : acc.real();
    }

    est.params = {{"gamma", cfg.gamma_line},
                  {"beta", cfg.beta},
                  {"epsilon", cfg.epsilon},
                  {"A_n", cut.a_n},
                  {"U_n", cut.u_n},
                  {"hermitian_defect", l1 > 0.0 ? defect / l1 : 0.0},
                  {"n", static_cast<double>(samples.size())}};
    if (variance_reduction) {
        const double expo = -m_n * cut.a_n * cut.a_n / 2.0;
        est.params["remainder_bound"] =
            expo < -745.0 ? 0.0 : std::pow(m_n, -(1.0 - cfg.gamma_line)) * std::exp(expo);
        est.params["m_n"] = m_n;
    }
    return est;
}

}  // namespace mdv
