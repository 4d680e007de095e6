#pragma once

// Test-only oracles, independent of the library implementations they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mdv/quadrature.hpp"

namespace oracle {

using cplx = std::complex<double>;

// log Gamma by argument shift plus the Stirling series with Bernoulli
// coefficients; deliberately a different algorithm from the library's
// Lanczos kernel.
inline cplx log_gamma_stirling(cplx z) {
    if (z.imag() < 0.0) return std::conj(log_gamma_stirling(std::conj(z)));
    cplx shift(0.0, 0.0);
    cplx w = z;
    while (w.real() < 30.0) {
        shift += std::log(w);
        w += 1.0;
    }
    static const double bern[] = {1.0 / 12,        -1.0 / 360,       1.0 / 1260,
                                  -1.0 / 1680,     1.0 / 1188,       -691.0 / 360360,
                                  1.0 / 156,       -3617.0 / 122400};
    cplx s = (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * M_PI);
    cplx zp = w;
    for (double b : bern) {
        s += b / zp;
        zp *= w * w;
    }
    return s - shift;
}

// int_0^A lambda^{c-1} e^{i x lambda} dlambda with a series head below delta
// and oscillation-resolving panels above it; used against the Kummer closed
// form for the stable-model kernel integral.
inline cplx power_oscillatory_integral(cplx c, double x, double a_n) {
    const double delta = std::min(0.1, 0.5 * a_n);
    cplx head(0.0, 0.0);
    cplx ix_pow(1.0, 0.0);
    double fact = 1.0;
    for (int k = 0; k < 80; ++k) {
        if (k > 0) fact *= k;
        const cplx term = ix_pow * std::exp((c + static_cast<double>(k)) * std::log(delta)) /
                          (fact * (c + static_cast<double>(k)));
        head += term;
        if (std::abs(term) < 1e-18 * std::abs(head) && k > 3) break;
        ix_pow *= cplx(0.0, x);
    }
    const double width = std::min(0.5, M_PI / (8.0 * (1.0 + std::abs(x))));
    const cplx tail = mdv::integrate_panels(
        [&](double lam) { return std::exp((c - 1.0) * std::log(lam) + cplx(0.0, x * lam)); },
        delta, a_n, width, 16);
    return head + tail;
}

// two-sided Kolmogorov-Smirnov statistic of a sample against a CDF
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    }
    return ks;
}

inline double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
}

}  // namespace oracle
