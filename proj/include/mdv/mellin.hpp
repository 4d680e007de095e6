#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdv/errors.hpp"
#include "mdv/quadrature.hpp"
#include "mdv/sample_set.hpp"
#include "mdv/special_functions.hpp"

namespace mdv {

// Weight classes for transform-decay smoothness norms: exponential decay
// e^{beta |v|} gives polynomial estimation rates, polynomial weight
// (1 + |v|^beta) gives logarithmic ones.
enum class SmoothnessMode { exp_decay, poly_decay };

inline SmoothnessMode smoothness_mode_from_string(std::string_view s) {
    if (s == "C" || s == "exp" || s == "exp_decay") return SmoothnessMode::exp_decay;
    if (s == "D" || s == "poly" || s == "poly_decay") return SmoothnessMode::poly_decay;
    throw ParamError("unknown smoothness mode: " + std::string(s));
}

// A Mellin transform together with its strip of analyticity.
struct MellinFunction {
    std::function<cplx(cplx)> evaluate;
    double strip_lo = 0.0;
    double strip_hi = 1.0;

    cplx operator()(cplx z) const { return evaluate(z); }

    bool contains_line(double gamma_line) const {
        return gamma_line > strip_lo && gamma_line < strip_hi;
    }
};

// M_n[p_{|X|}](z) = (1/n) sum |X_k|^{z-1}.  Re z > 1/2 keeps the variance
// finite; a zero sample only contributes (as 0) once Re z > 1.
inline cplx empirical_mellin(const SampleSet& samples, cplx z) {
    samples.validate();
    if (!(z.real() > 0.5))
        throw DomainError("empirical_mellin: requires Re z > 1/2");
    const cplx zm1 = z - 1.0;
    cplx acc(0.0, 0.0);
    for (double v : samples.values) {
        const double a = std::abs(v);
        if (a == 0.0) {
            if (z.real() <= 1.0)
                throw SingularSampleError("empirical_mellin: zero sample with Re z <= 1");
            continue;
        }
        acc += std::exp(zm1 * std::log(a));
    }
    return acc / static_cast<double>(samples.size());
}

// Empirical Mellin along a vertical line Re z = re: the per-sample modulus
// and log are hoisted so evaluation at many imaginary offsets is cheap.
class MellinLineEvaluator {
public:
    MellinLineEvaluator(const SampleSet& samples, double re) {
        samples.validate();
        if (!(re > 0.5)) throw DomainError("MellinLineEvaluator: requires Re z > 1/2");
        amp_.reserve(samples.size());
        logs_.reserve(samples.size());
        for (double v : samples.values) {
            const double a = std::abs(v);
            if (a == 0.0) {
                if (re <= 1.0)
                    throw SingularSampleError("MellinLineEvaluator: zero sample with Re z <= 1");
                continue;  // contributes 0
            }
            const double lg = std::log(a);
            amp_.push_back(std::exp((re - 1.0) * lg));
            logs_.push_back(lg);
        }
        inv_n_ = 1.0 / static_cast<double>(samples.size());
    }

    // value at z = re + i*im
    cplx at(double im) const {
        double sr = 0.0, si = 0.0;
        for (std::size_t k = 0; k < amp_.size(); ++k) {
            const double phase = im * logs_[k];
            sr += amp_[k] * std::cos(phase);
            si += amp_[k] * std::sin(phase);
        }
        return cplx(sr * inv_n_, si * inv_n_);
    }

private:
    std::vector<double> amp_, logs_;
    double inv_n_ = 0.0;
};

// Closed-form Mellin transforms used as fixtures and plug-in references.
inline MellinFunction mellin_gamma_density(double alpha) {
    if (!(alpha > 0.0)) throw ParamError("gamma_density: requires alpha > 0");
    const double lg_alpha = std::lgamma(alpha);
    MellinFunction m;
    m.evaluate = [alpha, lg_alpha](cplx z) {
        return std::exp(log_gamma(z + (alpha - 1.0)) - lg_alpha);
    };
    m.strip_lo = std::max(0.0, 1.0 - alpha);
    m.strip_hi = std::numeric_limits<double>::infinity();
    return m;
}

inline MellinFunction mellin_heavy_tail(double q) {
    if (!(q >= 2.0)) throw ParamError("heavy_tail_q: requires q >= 2");
    MellinFunction m;
    m.evaluate = [q](cplx z) { return std::sin(M_PI / q) / std::sin(M_PI * z / q); };
    m.strip_lo = 0.0;
    m.strip_hi = q;
    return m;
}

inline MellinFunction mellin_log_tail(double nu) {
    if (!(nu > 1.0)) throw ParamError("log_tail_q: requires nu > 1");
    MellinFunction m;
    m.evaluate = [nu](cplx z) {
        return 0.5 * (std::exp(-nu * std::log(z)) + std::exp(-nu * std::log(2.0 - z)));
    };
    m.strip_lo = 0.0;
    m.strip_hi = 2.0;
    return m;
}

inline MellinFunction analytic_mellin(std::string_view name,
                                      const std::map<std::string, double>& params) {
    auto get = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end())
            throw ParamError(std::string("analytic_mellin: missing parameter '") + key + "'");
        return it->second;
    };
    if (name == "gamma_density") return mellin_gamma_density(get("alpha"));
    if (name == "heavy_tail_q") return mellin_heavy_tail(get("q"));
    if (name == "log_tail_q") return mellin_log_tail(get("nu"));
    throw UnknownCatalogTag("analytic_mellin: unknown catalog tag '" + std::string(name) + "'");
}

// M[p_{|X|}] for X = B_T from M[p_T]:
//   M[p_{|X|}](w) = 2^{(w-1)/2} Gamma(w/2) M[p_T]((w+1)/2) / sqrt(pi)
inline MellinFunction mellin_abs_brownian(const MellinFunction& m_time) {
    MellinFunction m;
    const MellinFunction mt = m_time;
    m.evaluate = [mt](cplx w) {
        return std::exp(0.5 * (w - 1.0) * std::log(2.0) + log_gamma(0.5 * w)) / std::sqrt(M_PI) *
               mt((w + 1.0) / 2.0);
    };
    m.strip_lo = std::max(0.0, 2.0 * m_time.strip_lo - 1.0);
    m.strip_hi = 2.0 * m_time.strip_hi - 1.0;
    return m;
}

namespace detail {

// symmetric vertical-line nodes, fixed panel width (the integrands on the
// line are smooth; adaptivity buys nothing there)
inline CompositeNodes vertical_line_nodes(double cutoff, double panel_width = 0.5,
                                          int order = 16) {
    return composite_gauss_nodes(-cutoff, cutoff, panel_width, order);
}

}  // namespace detail

// Regularized inverse Mellin transform along Re z = gamma_line, truncated at
// |Im z| <= cutoff:  (1/2pi) int x^{-gamma-iv} m(gamma+iv) dv.
// The integrand is Hermitian for real densities; the surviving imaginary part
// is asserted small and discarded.
inline std::vector<double> mellin_inverse_regularized(const MellinFunction& m, double gamma_line,
                                                      double cutoff,
                                                      std::span<const double> x_grid) {
    if (!m.contains_line(gamma_line))
        throw StripError("mellin_inverse_regularized: gamma_line outside the strip");
    if (cutoff < 0.0) throw DomainError("mellin_inverse_regularized: cutoff must be >= 0");
    std::vector<double> out(x_grid.size(), 0.0);
    if (cutoff == 0.0) return out;

    const CompositeNodes nodes = detail::vertical_line_nodes(cutoff);
    std::vector<cplx> coeff(nodes.x.size());
    double l1 = 0.0;
    for (std::size_t j = 0; j < nodes.x.size(); ++j) {
        coeff[j] = nodes.w[j] * m(cplx(gamma_line, nodes.x[j]));
        l1 += std::abs(coeff[j]);
    }
    const double scale = l1 / (2.0 * M_PI);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        if (!(x > 0.0)) throw DomainError("mellin_inverse_regularized: grid requires x > 0");
        const double lx = std::log(x);
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < nodes.x.size(); ++j) {
            const double phase = -nodes.x[j] * lx;
            acc += coeff[j] * cplx(std::cos(phase), std::sin(phase));
        }
        acc *= std::exp(-gamma_line * lx) / (2.0 * M_PI);
        if (std::abs(acc.imag()) > 1e-8 * std::max(scale * std::exp(-gamma_line * lx), 1e-300))
            throw QuadratureError("mellin_inverse_regularized: Hermitian symmetry residue");
        out[i] = acc.real();
    }
    return out;
}

struct ConvolutionConfig {
    double log_span = 40.0;  // integrate over |log t| <= log_span
    double abs_tol = 1e-12;
    double rel_tol = 1e-9;
};

// Multiplicative (Mellin) convolution (f v g)(x) = int f(t) g(x/t) dt/t,
// evaluated on the log axis where it becomes an additive convolution.
template <class F, class G>
double multiplicative_convolution(F&& f, G&& g, double x, const ConvolutionConfig& cfg = {}) {
    if (!(x > 0.0)) throw DomainError("multiplicative_convolution: requires x > 0");
    const double s = std::log(x);
    auto integrand = [&](double u) { return f(std::exp(u)) * g(std::exp(s - u)); };
    QuadratureConfig qc;
    qc.abs_tol = cfg.abs_tol;
    qc.rel_tol = cfg.rel_tol;
    return integrate_adaptive(integrand, -cfg.log_span, cfg.log_span, qc);
}

// Truncated class norm int |m(gamma+iv)| w(v) dv with w = e^{beta|v|} or
// (1+|v|^beta).  The outer band of the truncation must carry under 1% of the
// total, otherwise the norm is not trusted at this cutoff.
inline double smoothness_norm(const MellinFunction& m, double beta, double gamma_line,
                              SmoothnessMode mode, double cutoff) {
    if (!m.contains_line(gamma_line)) throw StripError("smoothness_norm: gamma_line outside strip");
    if (!(beta > 0.0) || !(cutoff > 0.0)) throw DomainError("smoothness_norm: beta, cutoff > 0");
    auto weighted = [&](double v) {
        const double w = mode == SmoothnessMode::exp_decay ? std::exp(beta * std::abs(v))
                                                           : 1.0 + std::pow(std::abs(v), beta);
        return std::abs(m(cplx(gamma_line, v))) * w;
    };
    const double inner = integrate_panels(weighted, -0.8 * cutoff, 0.8 * cutoff, 0.5, 16);
    const double outer = integrate_panels(weighted, 0.8 * cutoff, cutoff, 0.5, 16) +
                         integrate_panels(weighted, -cutoff, -0.8 * cutoff, 0.5, 16);
    const double total = inner + outer;
    if (!(total >= 0.0) || !std::isfinite(total))
        throw TailError("smoothness_norm: non-finite norm");
    if (total > 0.0 && outer > 0.01 * total)
        throw TailError("smoothness_norm: tail band exceeds 1% of the truncated norm");
    return total;
}

}  // namespace mdv
