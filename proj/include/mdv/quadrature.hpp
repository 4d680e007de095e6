#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mdv/errors.hpp"

namespace mdv {

using cplx = std::complex<double>;

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int order) {
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev initial guess, Newton refinement on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[order - 1 - i] = rule.weights[i];
    }
    return rule;
}

}  // namespace detail

inline const GaussRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::unordered_map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, detail::compute_gauss_legendre(order)).first;
    return it->second;
}

// Nodes/weights of a composite rule, kept explicit so callers can precompute
// integrand factors per node and reuse them across evaluation points.
struct CompositeNodes {
    std::vector<double> x;
    std::vector<double> w;

    template <class F>
    auto integrate(F&& f) const {
        using R = decltype(f(0.0));
        R acc{};
        for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
        return acc;
    }
};

inline CompositeNodes composite_gauss_nodes(double a, double b, double panel_width, int order) {
    CompositeNodes out;
    if (!(b > a) || panel_width <= 0) return out;
    const auto& rule = gauss_legendre(order);
    const std::size_t panels = static_cast<std::size_t>(std::ceil((b - a) / panel_width));
    out.x.reserve(panels * order);
    out.w.reserve(panels * order);
    const double step = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + step * static_cast<double>(p);
        const double mid = lo + 0.5 * step;
        const double half = 0.5 * step;
        for (int j = 0; j < order; ++j) {
            out.x.push_back(mid + half * rule.nodes[j]);
            out.w.push_back(half * rule.weights[j]);
        }
    }
    return out;
}

template <class F>
auto integrate_panels(F&& f, double a, double b, double panel_width, int order) {
    return composite_gauss_nodes(a, b, panel_width, order).integrate(std::forward<F>(f));
}

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int max_intervals = 100000;
    int order = 15;
};

namespace detail {

template <class T>
double quad_norm(T v) {
    return std::abs(v);
}

}  // namespace detail

// Globally adaptive bisection: the cell with the largest error estimate is
// refined first, so point singularities get depth without starving the rest
// of the domain. Error per cell compares a Gauss panel against its halves.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
    using R = decltype(f(0.0));
    if (!(b > a)) return R{};
    const auto& rule = gauss_legendre(cfg.order);

    auto panel = [&](double lo, double hi, double& l1) {
        R s{};
        l1 = 0.0;
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (int j = 0; j < cfg.order; ++j) {
            const R fv = f(c + h * rule.nodes[j]);
            s += h * rule.weights[j] * fv;
            l1 += h * rule.weights[j] * detail::quad_norm(fv);
        }
        return s;
    };

    struct Cell {
        double a, b;
        R refined;   // left half + right half
        double err;  // |refined - single panel|
        double l1;
    };
    auto make_cell = [&](double lo, double hi) {
        double l1w = 0.0, l1l = 0.0, l1r = 0.0;
        const R whole = panel(lo, hi, l1w);
        const R halves = panel(lo, 0.5 * (lo + hi), l1l) + panel(0.5 * (lo + hi), hi, l1r);
        Cell c{lo, hi, halves, detail::quad_norm(halves - whole), l1l + l1r};
        // rounding floor: no point refining below the cell's own mass
        if (c.err < 1e-15 * c.l1) c.err = 0.0;
        return c;
    };

    std::vector<Cell> heap;
    auto cmp = [](const Cell& x, const Cell& y) { return x.err < y.err; };
    heap.push_back(make_cell(a, b));
    R running = heap[0].refined;  // drift-tolerant; only steers the stopping rule
    double total_err = heap[0].err, total_l1 = heap[0].l1;
    int evals_left = cfg.max_intervals;
    while (total_err > cfg.abs_tol && total_err > 1e-14 * total_l1 &&
           total_err > cfg.rel_tol * detail::quad_norm(running)) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        const Cell worst = heap.back();
        heap.pop_back();
        if (worst.err <= 0.0 || (evals_left -= 2) <= 0)
            throw QuadratureError("adaptive quadrature: tolerance not reached within budget");
        total_err -= worst.err;
        total_l1 -= worst.l1;
        running -= worst.refined;
        const double mid = 0.5 * (worst.a + worst.b);
        Cell left = make_cell(worst.a, mid);
        Cell right = make_cell(mid, worst.b);
        for (Cell* c : {&left, &right}) {
            total_err += c->err;
            total_l1 += c->l1;
            running += c->refined;
            heap.push_back(std::move(*c));
            std::push_heap(heap.begin(), heap.end(), cmp);
        }
    }
    R total{};
    for (const Cell& c : heap) total += c.refined;
    return total;
}

}  // namespace mdv
