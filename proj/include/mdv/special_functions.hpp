#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include "mdv/errors.hpp"
#include "mdv/quadrature.hpp"

namespace mdv {

namespace detail {

inline bool near_nonpositive_integer(cplx z, double tol = 1e-14) {
    const double r = std::round(z.real());
    if (r > 0.5) return false;
    return std::hypot(z.real() - r, z.imag()) < tol;
}

// log(sin(pi z)) for Im z >= 0, written so the e^{pi Im z} growth stays in the
// linear term instead of overflowing an intermediate exponential.
inline cplx log_sin_pi_upper(cplx z) {
    const cplx two_pi_i_z = cplx(0.0, 2.0 * M_PI) * z;
    // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}),   |e^{2 i pi z}| <= 1
    return cplx(-std::log(2.0), M_PI_2) - cplx(0.0, M_PI) * z +
           std::log(1.0 - std::exp(two_pi_i_z));
}

// Lanczos, g = 607/128, valid for Re z > 0.
inline cplx log_gamma_lanczos(cplx z) {
    static constexpr double g = 4.7421875;
    static constexpr double coeff[14] = {
        57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
        -0.491913816097620199,   0.339946499848118887e-4, 0.465236289270485756e-4,
        -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
        0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
        -0.261908384015814087e-4, 0.368991826595316234e-5};
    cplx ser(0.999999999999997092, 0.0);
    for (int i = 0; i < 14; ++i) ser += coeff[i] / (z + static_cast<double>(i + 1));
    const cplx t = z + (g + 0.5);
    return (z + 0.5) * std::log(t) - t + std::log(2.5066282746310005 * ser / z);
}

}  // namespace detail

// Principal-branch log Gamma, accurate on vertical lines (the contours every
// estimator integrates over). Reflection handles Re z < 1/2.
inline cplx log_gamma(cplx z) {
    if (detail::near_nonpositive_integer(z))
        throw PoleError("log_gamma: argument within 1e-14 of a non-positive integer");
    if (z.imag() < 0.0) return std::conj(log_gamma(std::conj(z)));
    if (z.real() < 0.5) {
        // log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        return std::log(M_PI) - detail::log_sin_pi_upper(z) - log_gamma(1.0 - z);
    }
    return detail::log_gamma_lanczos(z);
}

inline cplx complex_gamma(cplx z) {
    const cplx lg = log_gamma(z);
    const cplx g = std::exp(lg);
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
        throw DomainError("complex_gamma: result overflows double range");
    return g;
}

inline cplx recip_gamma(cplx z) {
    if (detail::near_nonpositive_integer(z, 1e-200)) return cplx(0.0, 0.0);
    if (detail::near_nonpositive_integer(z)) throw PoleError("recip_gamma: pole proximity");
    return std::exp(-log_gamma(z));
}

// |Gamma(alpha + i beta)| / (|beta|^{alpha - 1/2} e^{-|beta| pi/2}).
// Bounded above and below uniformly in |beta| >= 2 for fixed alpha; the tests
// pin the envelope, the estimators rely on it only qualitatively.
inline double gamma_envelope_ratio(double alpha, double beta) {
    if (std::abs(beta) < 2.0) throw DomainError("gamma_envelope_ratio: requires |beta| >= 2");
    if (alpha < -2.0) throw DomainError("gamma_envelope_ratio: requires alpha >= -2");
    const double ab = std::abs(beta);
    const double log_mag = log_gamma(cplx(alpha, ab)).real();
    return std::exp(log_mag - (alpha - 0.5) * std::log(ab) + ab * M_PI_2);
}

namespace detail {

inline cplx kummer_series(cplx a, cplx b, cplx z, double tol) {
    using cplxl = std::complex<long double>;
    const cplxl al(a.real(), a.imag()), bl(b.real(), b.imag()), zl(z.real(), z.imag());
    cplxl term(1.0L, 0.0L), sum(1.0L, 0.0L);
    for (int n = 0; n < 1200; ++n) {
        const long double nl = static_cast<long double>(n);
        term *= (al + nl) / (bl + nl) * zl / (nl + 1.0L);
        sum += term;
        if (std::abs(term) < tol * std::abs(sum) && n > 4)
            return cplx(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
    }
    throw ConvergenceError("kummer_1f1: Taylor series did not converge");
}

// Poincare expansion, optimally truncated. Both exponential contributions are
// kept; on the imaginary axis they are comparable.
inline cplx kummer_asymptotic(cplx a, cplx b, cplx z) {
    auto tail = [](cplx p, cplx q, cplx zz) {
        cplx term(1.0, 0.0), sum(1.0, 0.0);
        double best = std::numeric_limits<double>::max();
        cplx best_sum = sum;
        for (int s = 0; s < 200; ++s) {
            const double sd = static_cast<double>(s);
            term *= (p + sd) * (q + sd) / ((sd + 1.0) * zz);
            const double mag = std::abs(term);
            if (mag < best) {
                best = mag;
                sum += term;
                best_sum = sum;
            } else {
                break;  // divergence onset: stop at the smallest term
            }
            if (mag < 1e-18 * std::abs(sum)) {
                best_sum = sum;
                best = 0.0;
                break;
            }
        }
        if (best > 1e-8 * std::max(1.0, std::abs(best_sum)))
            throw ConvergenceError("kummer_1f1: asymptotic series not accurate enough");
        return best_sum;
    };
    const cplx lg_b = log_gamma(b);
    // e^z z^{a-b} Gamma(b)/Gamma(a) * S1
    cplx part1(0.0, 0.0);
    if (std::abs(recip_gamma(a)) > 0.0)
        part1 = std::exp(z + (a - b) * std::log(z) + lg_b - log_gamma(a)) * tail(b - a, 1.0 - a, z);
    // (-z)^{-a} Gamma(b)/Gamma(b-a) * S2
    cplx part2(0.0, 0.0);
    if (std::abs(recip_gamma(b - a)) > 0.0)
        part2 = std::exp(-a * std::log(-z) + lg_b - log_gamma(b - a)) * tail(a, a - b + 1.0, -z);
    return part1 + part2;
}

}  // namespace detail

// Kummer's confluent hypergeometric 1F1(a; b; z). Taylor series below the
// regime switch (long double accumulation tames the cancellation on the
// imaginary axis), Poincare asymptotics beyond it.
inline cplx kummer_1f1(cplx a, cplx b, cplx z, double tol = 1e-15) {
    if (detail::near_nonpositive_integer(b))
        throw PoleError("kummer_1f1: b within 1e-14 of a non-positive integer");
    const double az = std::abs(z);
    if (az == 0.0) return cplx(1.0, 0.0);
    cplx result;
    if (az <= 30.0) {
        // Kummer transform keeps the series argument in the right half-plane,
        // where the alternating cancellation is measured against e^{Re z}.
        if (z.real() < 0.0)
            result = std::exp(z) * detail::kummer_series(b - a, b, -z, tol);
        else
            result = detail::kummer_series(a, b, z, tol);
    } else {
        result = detail::kummer_asymptotic(a, b, z);
    }
    if (!std::isfinite(result.real()) || !std::isfinite(result.imag()))
        throw DomainError("kummer_1f1: value exceeds double range");
    return result;
}

namespace detail {

inline cplx erf_series(cplx z) {
    using cplxl = std::complex<long double>;
    const cplxl zl(z.real(), z.imag());
    const cplxl z2 = zl * zl;
    cplxl term = zl, sum = zl;
    for (int n = 1; n < 300; ++n) {
        term *= -z2 / static_cast<long double>(n);
        const cplxl inc = term / static_cast<long double>(2 * n + 1);
        sum += inc;
        if (std::abs(inc) < 1e-19L * std::abs(sum)) break;
    }
    sum *= 2.0L / std::sqrt(static_cast<long double>(M_PI));
    return cplx(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
}

// Laplace continued fraction for erfc, Re z > 0, |z| moderately large:
// erfc(z) = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
inline cplx erfc_cf(cplx z) {
    const double tiny = 1e-300;
    cplx f(tiny, 0.0), c(tiny, 0.0), d(0.0, 0.0);
    bool converged = false;
    for (int k = 1; k <= 500; ++k) {
        const cplx ak = (k == 1) ? cplx(1.0, 0.0) : cplx(0.5 * (k - 1), 0.0);
        d = z + ak * d;
        if (std::abs(d) < tiny) d = tiny;
        c = z + ak / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const cplx delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) {
            converged = true;
            break;
        }
    }
    if (!converged) throw ConvergenceError("complex_erfc: continued fraction stalled");
    return std::exp(-z * z) * f / std::sqrt(M_PI);
}

}  // namespace detail

// Error function for complex argument; series near the origin, continued
// fraction for erfc farther out.
inline cplx complex_erf(cplx z) {
    if (z.real() < 0.0) return -complex_erf(-z);
    if (z.imag() < 0.0) return std::conj(complex_erf(std::conj(z)));
    if (std::abs(z) <= 4.5) return detail::erf_series(z);
    return 1.0 - detail::erfc_cf(z);
}

// erfc without the 1 - erf cancellation in the far right half-plane.
inline cplx complex_erfc(cplx z) {
    if (z.real() > 0.0 && std::abs(z) > 4.5) {
        if (z.imag() < 0.0) return std::conj(complex_erfc(std::conj(z)));
        return detail::erfc_cf(z);
    }
    return 1.0 - complex_erf(z);
}

// Modified Bessel K_nu(x) for x > 0 through the cosh integral representation.
// Accuracy is more than sufficient for density normalisation constants.
inline double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k: requires x > 0");
    const double anu = std::abs(nu);
    // integrand exp(-x cosh t) cosh(nu t); truncate when the exponent is gone
    double t_max = 2.0;
    while (x * std::cosh(t_max) - anu * t_max < 750.0 && t_max < 700.0) t_max += 1.0;
    auto f = [&](double t) {
        const double e = -x * std::cosh(t) + std::log(std::cosh(anu * t));
        return e < -745.0 ? 0.0 : std::exp(e);
    };
    return integrate_panels(f, 0.0, t_max, 0.25, 16);
}

}  // namespace mdv
