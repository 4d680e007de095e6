#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "mdv/errors.hpp"
#include "mdv/quadrature.hpp"

namespace mdv {

// One atom of a finite discrete jump measure.
struct Jump {
    double size = 0.0;
    double weight = 0.0;
};

// Characteristic exponent psi(u) = -t^{-1} log E[exp(i u L_t)] of a Levy
// process, with its derivative. Presets cover the drifted Brownian and
// symmetric stable cases; general triplets are restricted to finite discrete
// jump measures so psi stays in closed form.
class LevyModel {
public:
    enum class Kind { brownian_drift, stable, triplet };

    static LevyModel brownian(double sigma = 1.0) { return brownian_drift(0.0, sigma); }

    static LevyModel brownian_drift(double mu, double sigma) {
        LevyModel m;
        m.kind_ = Kind::brownian_drift;
        m.mu_ = mu;
        m.sigma2_ = sigma * sigma;
        return m;
    }

    static LevyModel stable(double alpha) {
        if (!(alpha > 0.0) || alpha > 2.0) throw ModelError("stable: requires alpha in (0, 2]");
        LevyModel m;
        m.kind_ = Kind::stable;
        m.alpha_ = alpha;
        return m;
    }

    static LevyModel triplet(double mu, double sigma2, std::vector<Jump> jumps) {
        if (sigma2 < 0.0) throw ModelError("triplet: sigma^2 must be nonnegative");
        for (const Jump& j : jumps)
            if (j.weight < 0.0) throw ModelError("triplet: jump weights must be nonnegative");
        LevyModel m;
        m.kind_ = Kind::triplet;
        m.mu_ = mu;
        m.sigma2_ = sigma2;
        m.jumps_ = std::move(jumps);
        return m;
    }

    cplx psi(double u) const {
        switch (kind_) {
            case Kind::brownian_drift:
                return cplx(0.5 * sigma2_ * u * u, -mu_ * u);
            case Kind::stable:
                return cplx(std::pow(std::abs(u), alpha_), 0.0);
            case Kind::triplet: {
                cplx acc(0.5 * sigma2_ * u * u, -mu_ * u);
                for (const Jump& j : jumps_) {
                    const double ux = u * j.size;
                    acc += j.weight * cplx(1.0 - std::cos(ux),
                                           -std::sin(ux) + (std::abs(j.size) <= 1.0 ? ux : 0.0));
                }
                return acc;
            }
        }
        return {};
    }

    cplx psi_prime(double u) const {
        switch (kind_) {
            case Kind::brownian_drift:
                return cplx(sigma2_ * u, -mu_);
            case Kind::stable: {
                if (u == 0.0) return cplx(0.0, 0.0);
                const double s = u > 0.0 ? 1.0 : -1.0;
                return cplx(alpha_ * s * std::pow(std::abs(u), alpha_ - 1.0), 0.0);
            }
            case Kind::triplet: {
                // psi'(u) = -i mu + u sigma^2 - i sum w_j x_j (e^{i u x_j} - 1_{|x_j|<=1})
                cplx acc(sigma2_ * u, -mu_);
                for (const Jump& j : jumps_) {
                    const double ux = u * j.size;
                    const cplx e(std::cos(ux), std::sin(ux));
                    const double ind = std::abs(j.size) <= 1.0 ? 1.0 : 0.0;
                    acc += cplx(0.0, -1.0) * (j.weight * j.size) * (e - ind);
                }
                return acc;
            }
        }
        return {};
    }

    Kind kind() const { return kind_; }
    double stable_alpha() const { return alpha_; }
    double drift() const { return mu_; }
    double diffusion() const { return sigma2_; }

    std::string describe() const {
        switch (kind_) {
            case Kind::brownian_drift:
                return "brownian_drift(mu=" + std::to_string(mu_) +
                       ", sigma^2=" + std::to_string(sigma2_) + ")";
            case Kind::stable:
                return "stable(alpha=" + std::to_string(alpha_) + ")";
            case Kind::triplet:
                return "triplet(" + std::to_string(jumps_.size()) + " jumps)";
        }
        return {};
    }

private:
    Kind kind_ = Kind::brownian_drift;
    double mu_ = 0.0;
    double sigma2_ = 1.0;
    double alpha_ = 2.0;
    std::vector<Jump> jumps_;
};

inline cplx char_exponent(const LevyModel& model, double u) { return model.psi(u); }

// Diagnostics for the sector condition |Im psi| / Re psi < A and the
// divergence Re psi -> infinity that the contour rotation argument needs.
struct ContourReport {
    double a_hat = 0.0;           // max |Im psi| / Re psi over the grid
    bool re_divergent = false;    // Re psi grows by 10x from median to top of grid
    std::size_t zero_re_points = 0;
    bool condition_violated = false;
};

inline ContourReport contour_condition_check(const LevyModel& model,
                                             std::span<const double> u_grid) {
    if (u_grid.size() < 3) throw ParamError("contour_condition_check: grid too small");
    for (std::size_t i = 1; i < u_grid.size(); ++i)
        if (!(u_grid[i] > u_grid[i - 1]))
            throw ParamError("contour_condition_check: grid must be increasing");
    if (!(u_grid.back() >= 100.0))
        throw ParamError("contour_condition_check: grid must reach u >= 100");

    ContourReport rep;
    std::vector<double> re_vals(u_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const cplx p = model.psi(u_grid[i]);
        re_vals[i] = p.real();
        if (p.real() <= 0.0) {
            ++rep.zero_re_points;
            if (std::abs(p.imag()) > 1e-14) rep.condition_violated = true;
        } else {
            rep.a_hat = std::max(rep.a_hat, std::abs(p.imag()) / p.real());
        }
    }
    const double re_median = re_vals[u_grid.size() / 2];
    const double re_top = re_vals.back();
    rep.re_divergent = re_top > 10.0 * std::max(re_median, 0.0) && re_top > 0.0;
    if (!rep.re_divergent && rep.zero_re_points == u_grid.size()) rep.condition_violated = true;
    return rep;
}

}  // namespace mdv
