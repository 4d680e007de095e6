#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "mdv/density_estimate.hpp"
#include "mdv/errors.hpp"
#include "mdv/mellin.hpp"
#include "mdv/quadrature.hpp"
#include "mdv/sample_set.hpp"
#include "mdv/special_functions.hpp"

namespace mdv {

// Estimator settings for samples of a stopped Brownian motion X = B_T.
struct SseConfig {
    double gamma_line = 0.8;  // inversion line, must exceed 3/4
    double beta = M_PI_2;     // smoothness exponent of the target class
    SmoothnessMode mode = SmoothnessMode::exp_decay;
    double bandwidth_multiplier = 1.0;
    std::size_t n = 0;  // sample size the bandwidth rule refers to
    bool clip_nonnegative = false;

    void validate() const {
        if (!(gamma_line > 0.75))
            throw DomainError("SseConfig: gamma_line must exceed 3/4");
        if (!(beta > 0.0)) throw DomainError("SseConfig: beta must be positive");
        if (!(bandwidth_multiplier > 0.0))
            throw DomainError("SseConfig: bandwidth_multiplier must be positive");
    }
};

// Spectral bandwidth rule. The exp-decay class gets
//   h = c (pi + 2 beta) / (log n - 2(1-gamma) log log n)      (gamma < 1)
//   h = c (pi + 2 beta) / log n                               (gamma >= 1)
// and the poly-decay class
//   h = c pi / (log n - 2(beta + 1 - gamma) log log n)        (gamma < 1)
//   h = c pi / (log n - 2 beta log log n)                     (gamma >= 1).
inline double bandwidth(std::size_t n, double beta, double gamma_line, SmoothnessMode mode,
                        double multiplier = 1.0) {
    if (n < 3) throw DomainError("bandwidth: requires n >= 3");
    if (!(beta > 0.0)) throw DomainError("bandwidth: beta must be positive");
    const double ln = std::log(static_cast<double>(n));
    const double lln = std::log(ln);
    double denom = 0.0, numer = 0.0;
    if (mode == SmoothnessMode::exp_decay) {
        numer = M_PI + 2.0 * beta;
        denom = gamma_line < 1.0 ? ln - 2.0 * (1.0 - gamma_line) * lln : ln;
    } else {
        numer = M_PI;
        denom = gamma_line < 1.0 ? ln - 2.0 * (beta + 1.0 - gamma_line) * lln
                                 : ln - 2.0 * beta * lln;
    }
    if (!(denom > 0.0))
        throw DomainError("bandwidth: n too small for the given beta and gamma");
    return multiplier * numer / denom;
}

// rho_n = n^{-1/2} h^{2(gamma-1)} log^{-2}(1/h) e^{pi/h}; diagnostic scale of
// the estimator's fluctuations.
inline double variance_rate_rho(std::size_t n, double h, double gamma_line) {
    if (!(h > 0.0) || h >= 1.0) throw DomainError("variance_rate_rho: requires 0 < h < 1");
    const double l = std::log(1.0 / h);
    return std::exp(-0.5 * std::log(static_cast<double>(n)) +
                    2.0 * (gamma_line - 1.0) * std::log(h) - 2.0 * std::log(l) + M_PI / h);
}

namespace detail {

// Shared node data for the spectral-cutoff inversion on [-1/h, 1/h]:
// inv_denom_j = w_j / (2^{gamma+iv_j} Gamma(gamma - 1/2 + iv_j)).
struct SseNodes {
    std::vector<double> v;
    std::vector<cplx> inv_denom;  // weight folded in

    SseNodes(double gamma_line, double h) {
        const CompositeNodes base = vertical_line_nodes(1.0 / h);
        v = base.x;
        inv_denom.resize(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            const cplx z(gamma_line, v[j]);
            inv_denom[j] =
                base.w[j] * std::exp(-z * std::log(2.0) - log_gamma(z - 0.5));
        }
    }
};

inline std::vector<double> assemble_sse(const SseNodes& nodes, std::span<const cplx> mellin_vals,
                                        double gamma_line, std::span<const double> x_grid,
                                        bool clip, double residue_tol) {
    std::vector<cplx> coeff(nodes.v.size());
    double l1 = 0.0;
    for (std::size_t j = 0; j < coeff.size(); ++j) {
        coeff[j] = mellin_vals[j] * nodes.inv_denom[j];
        l1 += std::abs(coeff[j]);
    }
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    std::vector<double> out(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        if (!(x > 0.0)) throw DomainError("estimate_sse: grid requires x > 0");
        const double lx = std::log(x);
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < coeff.size(); ++j) {
            const double phase = -nodes.v[j] * lx;
            acc += coeff[j] * cplx(std::cos(phase), std::sin(phase));
        }
        acc *= inv_sqrt_pi * std::exp(-gamma_line * lx);
        const double scale = inv_sqrt_pi * std::exp(-gamma_line * lx) * l1;
        if (std::abs(acc.imag()) > residue_tol * std::max(scale, 1e-300))
            throw QuadratureError("estimate_sse: Hermitian symmetry residue too large");
        out[i] = clip ? std::max(0.0, acc.real()) : acc.real();
    }
    return out;
}

}  // namespace detail

// Spectral-cutoff estimator of the time density from samples of |B_T|:
//   p_{T,n}(x) = (1/sqrt(pi)) int_{-1/h}^{1/h} x^{-gamma-iv}
//                M_n[p_{|X|}](2(gamma+iv)-1) / (2^{gamma+iv} Gamma(gamma-1/2+iv)) dv
inline DensityEstimate estimate_sse(const SampleSet& samples, const SseConfig& config, double h,
                                    std::span<const double> x_grid) {
    config.validate();
    if (!(h > 0.0)) throw DomainError("estimate_sse: bandwidth must be positive");
    const detail::SseNodes nodes(config.gamma_line, h);
    const MellinLineEvaluator mn(samples, 2.0 * config.gamma_line - 1.0);
    std::vector<cplx> mvals(nodes.v.size());
    for (std::size_t j = 0; j < mvals.size(); ++j) mvals[j] = mn.at(2.0 * nodes.v[j]);

    DensityEstimate est;
    est.route = "sse";
    est.x_grid.assign(x_grid.begin(), x_grid.end());
    est.values = detail::assemble_sse(nodes, mvals, config.gamma_line, x_grid,
                                      config.clip_nonnegative, 1e-6);
    est.params = {{"gamma", config.gamma_line}, {"beta", config.beta}, {"h", h},
                  {"n", static_cast<double>(samples.size())}};
    return est;
}

// Plug-in mode: the empirical transform is replaced by an exact Mellin
// transform of p_{|X|}, isolating the regularization bias from sampling
// error.
inline DensityEstimate estimate_sse_plugin(const MellinFunction& mellin_abs_x,
                                           const SseConfig& config, double h,
                                           std::span<const double> x_grid) {
    config.validate();
    if (!(h > 0.0)) throw DomainError("estimate_sse_plugin: bandwidth must be positive");
    const detail::SseNodes nodes(config.gamma_line, h);
    std::vector<cplx> mvals(nodes.v.size());
    for (std::size_t j = 0; j < mvals.size(); ++j) {
        const cplx w(2.0 * config.gamma_line - 1.0, 2.0 * nodes.v[j]);
        if (!(w.real() > mellin_abs_x.strip_lo && w.real() < mellin_abs_x.strip_hi))
            throw StripError("estimate_sse_plugin: 2*gamma-1 outside the transform strip");
        mvals[j] = mellin_abs_x(w);
    }
    DensityEstimate est;
    est.route = "sse-plugin";
    est.x_grid.assign(x_grid.begin(), x_grid.end());
    est.values = detail::assemble_sse(nodes, mvals, config.gamma_line, x_grid,
                                      config.clip_nonnegative, 1e-8);
    est.params = {{"gamma", config.gamma_line}, {"beta", config.beta}, {"h", h}};
    return est;
}

// Per-observation term Z_{n,k}; averaging it over a sample reproduces
// estimate_sse exactly up to accumulation order.
inline double z_term(double sample_value, const SseConfig& config, double h, double x) {
    config.validate();
    if (!(h > 0.0)) throw DomainError("z_term: bandwidth must be positive");
    if (!(x > 0.0)) throw DomainError("z_term: requires x > 0");
    const detail::SseNodes nodes(config.gamma_line, h);
    const double a = std::abs(sample_value);
    const double re = 2.0 * config.gamma_line - 1.0;
    if (a == 0.0 && re <= 1.0)
        throw SingularSampleError("z_term: zero sample with 2*gamma - 1 <= 1");
    const double lx = std::log(x);
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < nodes.v.size(); ++j) {
        cplx mellin_term(0.0, 0.0);
        if (a > 0.0) {
            const double la = std::log(a);
            mellin_term = std::exp((re - 1.0) * la) *
                          cplx(std::cos(2.0 * nodes.v[j] * la), std::sin(2.0 * nodes.v[j] * la));
        }
        const double phase = -nodes.v[j] * lx;
        acc += mellin_term * nodes.inv_denom[j] * cplx(std::cos(phase), std::sin(phase));
    }
    acc *= std::exp(-config.gamma_line * lx) / std::sqrt(M_PI);
    return acc.real();
}

}  // namespace mdv
