#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <unordered_map>

#include "mdv/errors.hpp"
#include "mdv/mellin.hpp"
#include "mdv/quadrature.hpp"
#include "mdv/special_functions.hpp"

namespace mdv {

// Machinery from the two-point minimax constructions, used as test oracles:
// an oscillatory perturbation rho_M with closed-form Mellin transform, the
// perturbed density pairs built from it, Gaussian scale mixing, and the
// chi-square separation.

enum class PerturbVariant { poly, logarithmic };

// rho_M(x) = (2 pi)^{-1/2} e^{-log^2(x)/2} sin(M log x) / x            (poly)
//            ... / (x log x), with limit M (2 pi)^{-1/2} at x = 1      (log)
inline double rho_m(PerturbVariant variant, double M, double x) {
    if (!(x > 0.0)) throw DomainError("rho_m: requires x > 0");
    if (!(M > 0.0)) throw DomainError("rho_m: requires M > 0");
    const double t = std::log(x);
    const double envelope = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
    if (variant == PerturbVariant::poly) return envelope * std::sin(M * t) / x;
    if (std::abs(t) < 1e-8) return envelope * M * (1.0 - (M * t) * (M * t) / 6.0) / x;
    return envelope * std::sin(M * t) / (x * t);
}

namespace detail {

// G(u, v) = int_{-infty}^v e^{-x^2/2 + i x (u-1)} dx
//         = e^{-(u-1)^2/2} sqrt(pi/2) (1 + erf((v - i(u-1))/sqrt(2)))
inline cplx g_lower_incomplete(double u, double v) {
    const double a = u - 1.0;
    const cplx arg = cplx(v, -a) / std::sqrt(2.0);
    const double pref = std::exp(-0.5 * a * a) * std::sqrt(M_PI_2);
    if (v <= 0.0) return pref * complex_erfc(-arg);  // avoids 1 - erf cancellation
    return pref * (1.0 + complex_erf(arg));
}

}  // namespace detail

// Closed-form Mellin transform of rho_M at z = u + iv.
inline cplx mellin_rho_m(PerturbVariant variant, double M, cplx z) {
    if (!(M > 0.0)) throw DomainError("mellin_rho_m: requires M > 0");
    const double u = z.real(), v = z.imag();
    if (variant == PerturbVariant::poly) {
        const cplx e_plus = std::exp(0.5 * std::pow(cplx(u - 1.0, v + M), 2));
        const cplx e_minus = std::exp(0.5 * std::pow(cplx(u - 1.0, v - M), 2));
        return (e_plus - e_minus) / cplx(0.0, 2.0);
    }
    return std::exp(0.5 * (u - 1.0) * (u - 1.0)) *
           (detail::g_lower_incomplete(u, v + M) - detail::g_lower_incomplete(u, v - M)) / 2.0;
}

// zeta_M = M[rho_M](1) for the log variant = sqrt(pi/2) erf(M/sqrt(2))
inline double zeta_m(double M) {
    return std::sqrt(M_PI_2) * complex_erf(cplx(M / std::sqrt(2.0), 0.0)).real();
}

// Base density of the poly construction: q(x) = (nu sin(pi/nu)/pi) / (1+x^nu)
inline double q_poly(double nu, double x) {
    if (x < 0.0) return 0.0;
    return (nu * std::sin(M_PI / nu) / M_PI) / (1.0 + std::pow(x, nu));
}

// Base density of the log construction:
// q(x) = [2 Gamma(nu)]^{-1} { log^{nu-1}(1/x) on (0,1];  x^{-2} log^{nu-1}(x) on (1,inf) }
inline double q_log(double nu, double x) {
    if (x <= 0.0) return 0.0;
    const double c = 0.5 * std::exp(-std::lgamma(nu));
    if (x <= 1.0) {
        const double l = -std::log(x);
        return l <= 0.0 ? (nu > 1.0 ? 0.0 : c) : c * std::pow(l, nu - 1.0);
    }
    const double l = std::log(x);
    return c * std::pow(l, nu - 1.0) / (x * x);
}

struct PerturbedPair {
    PerturbVariant variant = PerturbVariant::poly;
    double nu = 2.0;
    double M = 4.0;
    double zeta = 0.0;  // log variant only
    std::function<double(double)> q0;
    std::function<double(double)> q1;
    std::function<double(double)> delta;  // q1 - q0, computed directly
};

// Perturbed density pair:
//   poly: q1 = q + (q v rho_M)
//   log : q1 = (1 - zeta_M) q + (q v rho_M)
// The convolution runs through multiplicative_convolution and is memoised per
// evaluation point, since the mixtures below revisit a fixed grid.
// default tolerances are tight: the chi-square separations probed downstream
// live at the 1e-12 scale, where loose per-point convolution errors would
// integrate into visible bias
inline PerturbedPair build_pair(PerturbVariant variant, double nu, double M,
                                const ConvolutionConfig& conv_cfg = {40.0, 1e-13, 1e-11}) {
    if (!(nu > 1.0)) throw ParamError("build_pair: requires nu > 1");
    if (!(M > 0.0)) throw ParamError("build_pair: requires M > 0");
    PerturbedPair pair;
    pair.variant = variant;
    pair.nu = nu;
    pair.M = M;

    auto base = variant == PerturbVariant::poly
                    ? std::function<double(double)>([nu](double x) { return q_poly(nu, x); })
                    : std::function<double(double)>([nu](double x) { return q_log(nu, x); });
    pair.q0 = base;

    auto cache = std::make_shared<std::unordered_map<double, double>>();
    auto conv = [variant, M, base, cache, conv_cfg](double x) {
        auto it = cache->find(x);
        if (it != cache->end()) return it->second;
        const double v = multiplicative_convolution(
            base, [variant, M](double y) { return rho_m(variant, M, y); }, x, conv_cfg);
        cache->emplace(x, v);
        return v;
    };

    if (variant == PerturbVariant::poly) {
        pair.delta = conv;
        pair.q1 = [base, conv](double x) { return base(x) + conv(x); };
    } else {
        const double zeta = zeta_m(M);
        pair.zeta = zeta;
        pair.delta = [base, conv, zeta](double x) { return conv(x) - zeta * base(x); };
        pair.q1 = [base, conv, zeta](double x) { return (1.0 - zeta) * base(x) + conv(x); };
    }
    return pair;
}

// Density of |W_T| when T has (signed) mixing density q:
//   p(x) = (2/sqrt(2 pi)) int_0^infty lambda^{-1/2} e^{-x^2/(2 lambda)} q(lambda) dlambda.
// Fixed log-axis panels: every x shares the same lambda nodes, so memoised
// mixing densities are evaluated once.
template <class Q>
double mixture_density(Q&& q, double x) {
    if (x < 0.0) throw DomainError("mixture_density: requires x >= 0");
    const double x2 = 0.5 * x * x;
    auto integrand = [&](double w) {
        const double expo = 0.5 * w - x2 * std::exp(-w);
        if (expo < -745.0) return 0.0;
        return std::exp(expo) * q(std::exp(w));
    };
    const double val = integrate_panels(integrand, -26.0, 30.0, 0.25, 8);
    return val * 2.0 / std::sqrt(2.0 * M_PI);
}

struct ChiSquareConfig {
    double x_max = 50.0;
    double abs_tol = 1e-300;  // relative refinement regardless of scale
    double rel_tol = 1e-6;
};

// chi^2(p1 | p0) = int (p1 - p0)^2 / p0 over [0, x_max].  The fixtures decay
// polynomially, so the tail beyond x_max is controlled analytically.
template <class P0, class P1>
double chi_square_distance(P0&& p0, P1&& p1, const ChiSquareConfig& cfg = {}) {
    auto integrand = [&](double x) {
        const double a = p0(x);
        const double d = p1(x) - a;
        if (d == 0.0) return 0.0;
        if (a < 1e-300) throw DivideError("chi_square_distance: p0 underflows on the domain");
        return d * d / a;
    };
    QuadratureConfig qc;
    qc.abs_tol = cfg.abs_tol;
    qc.rel_tol = cfg.rel_tol;
    return integrate_adaptive(integrand, 0.0, cfg.x_max, qc);
}

}  // namespace mdv
