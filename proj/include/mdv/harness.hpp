#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mdv/density_estimate.hpp"
#include "mdv/errors.hpp"
#include "mdv/gsse.hpp"
#include "mdv/io.hpp"
#include "mdv/parallel.hpp"
#include "mdv/sample_set.hpp"
#include "mdv/simulate.hpp"
#include "mdv/sse.hpp"

namespace mdv {

// Monte Carlo experiment driver: replicated simulation + estimation with
// sup-loss statistics against the known time density.

enum class Route { sse, gsse, gsse_decomposed };

inline Route route_from_string(std::string_view s) {
    if (s == "sse") return Route::sse;
    if (s == "gsse") return Route::gsse;
    if (s == "gsse-decomposed" || s == "gsse_decomposed") return Route::gsse_decomposed;
    throw ParamError("unknown route: " + std::string(s));
}

inline std::string route_to_string(Route r) {
    switch (r) {
        case Route::sse: return "sse";
        case Route::gsse: return "gsse";
        case Route::gsse_decomposed: return "gsse-decomposed";
    }
    return {};
}

struct GridSpec {
    double x_min = 0.05;
    double x_max = 10.0;
    std::size_t points = 200;

    std::vector<double> make() const {
        if (points < 2 || !(x_min > 0.0) || !(x_max > x_min))
            throw ParamError("GridSpec: requires 0 < x_min < x_max and >= 2 points");
        std::vector<double> g(points);
        for (std::size_t i = 0; i < points; ++i)
            g[i] = x_min + (x_max - x_min) * static_cast<double>(i) /
                               static_cast<double>(points - 1);
        return g;
    }
};

struct ExperimentSpec {
    TimeDistribution dist = TimeDistribution::gamma_time(2.0);
    ObservationModel obs = ObservationModel::brownian();
    Route route = Route::sse;
    SseConfig sse;
    GsseConfig gsse;
    std::vector<std::size_t> n_list = {1000};
    std::size_t replications = 50;
    std::uint64_t master_seed = 1;
    GridSpec grid;
    std::size_t curve_n_index = 0;  // which n contributes the stored curves
    unsigned threads = 0;           // 0 = hardware concurrency
};

struct NSummary {
    std::size_t n = 0;
    double q1 = 0, median = 0, q3 = 0, whisker_lo = 0, whisker_hi = 0;
    std::vector<double> losses;  // per replication
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<NSummary> per_n;
    std::vector<DensityEstimate> curves;  // replications at n_list[curve_n_index]
    std::vector<double> x_grid;
    std::vector<double> true_density;
    double runtime_seconds = 0;
};

namespace detail {

inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

inline NSummary summarize_losses(std::size_t n, std::vector<double> losses) {
    NSummary s;
    s.n = n;
    s.losses = std::move(losses);
    std::vector<double> sorted = s.losses;
    std::sort(sorted.begin(), sorted.end());
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.50);
    s.q3 = quantile_sorted(sorted, 0.75);
    const double iqr = s.q3 - s.q1;
    double lo = s.q1, hi = s.q3;
    for (double v : sorted) {
        if (v >= s.q1 - 1.5 * iqr) {
            lo = v;
            break;
        }
    }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (*it <= s.q3 + 1.5 * iqr) {
            hi = *it;
            break;
        }
    }
    s.whisker_lo = lo;
    s.whisker_hi = hi;
    return s;
}

}  // namespace detail

// One replication: simulate times and observations with seeds derived from
// the master seed by (n-index, replication) counters, then estimate.
inline DensityEstimate run_replication(const ExperimentSpec& spec, std::size_t n_index,
                                       std::size_t replication, std::span<const double> grid) {
    const std::size_t n = spec.n_list.at(n_index);
    const std::uint64_t stream = n_index * 1000003ULL + replication * 2ULL;
    const SampleSet times =
        sample_times(spec.dist, n, derive_seed(spec.master_seed, stream));
    const SampleSet obs =
        sample_observations(times, spec.obs, derive_seed(spec.master_seed, stream + 1));

    if (spec.route == Route::sse) {
        SseConfig cfg = spec.sse;
        cfg.n = n;
        const double h = bandwidth(n, cfg.beta, cfg.gamma_line, cfg.mode,
                                   cfg.bandwidth_multiplier);
        return estimate_sse(obs, cfg, h, grid);
    }
    GsseConfig cfg = spec.gsse;
    cfg.n = n;
    LevyModel model = LevyModel::brownian(1.0);
    if (spec.obs.kind == ObservationModel::Kind::variance_mean)
        model = LevyModel::brownian_drift(spec.obs.mu, spec.obs.sigma);
    else if (spec.obs.kind == ObservationModel::Kind::subordinated_stable)
        model = LevyModel::stable(spec.obs.alpha);
    return estimate_gsse(obs, model, cfg, grid, spec.route == Route::gsse_decomposed);
}

inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.spec = spec;
    report.x_grid = spec.grid.make();
    report.true_density.resize(report.x_grid.size());
    for (std::size_t i = 0; i < report.x_grid.size(); ++i)
        report.true_density[i] = spec.dist.density(report.x_grid[i]);

    for (std::size_t ni = 0; ni < spec.n_list.size(); ++ni) {
        std::vector<double> losses(spec.replications, 0.0);
        std::vector<DensityEstimate> curves(ni == spec.curve_n_index ? spec.replications : 0);
        parallel_for_index(spec.replications, spec.threads, [&](std::size_t rep) {
            DensityEstimate est = run_replication(spec, ni, rep, report.x_grid);
            double sup = 0.0;
            for (std::size_t i = 0; i < est.values.size(); ++i)
                sup = std::max(sup, std::abs(est.values[i] - report.true_density[i]));
            losses[rep] = sup;
            if (!curves.empty()) curves[rep] = std::move(est);
        });
        report.per_n.push_back(detail::summarize_losses(spec.n_list[ni], std::move(losses)));
        if (!curves.empty()) report.curves = std::move(curves);
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

struct RateFit {
    double slope = 0;
    double stderr_slope = 0;
};

// Least-squares slope of log median-loss against log n, pooled over reports.
inline RateFit rate_regression(std::span<const ExperimentReport> reports) {
    std::vector<double> xs, ys;
    for (const ExperimentReport& r : reports)
        for (const NSummary& s : r.per_n) {
            if (!(s.median > 0.0)) continue;
            xs.push_back(std::log(static_cast<double>(s.n)));
            ys.push_back(std::log(s.median));
        }
    std::vector<double> distinct = xs;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw InsufficientData("rate_regression: needs >= 3 distinct sample sizes");
    const std::size_t m = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    if (m > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = ys[i] - my - fit.slope * (xs[i] - mx);
            rss += r * r;
        }
        fit.stderr_slope = std::sqrt(rss / (static_cast<double>(m - 2) * sxx));
    }
    return fit;
}

struct NormalityReport {
    double skewness = 0;
    double excess_kurtosis = 0;
    bool pass = false;
};

// Moment diagnostic on replicated estimates: pass iff |skew| < 0.5 and
// |excess kurtosis| < 1.
inline NormalityReport normality_diagnostic(std::span<const double> values) {
    if (values.size() < 200)
        throw InsufficientData("normality_diagnostic: needs >= 200 values");
    const double n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    NormalityReport rep;
    rep.skewness = m3 / std::pow(m2, 1.5);
    rep.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    rep.pass = std::abs(rep.skewness) < 0.5 && std::abs(rep.excess_kurtosis) < 1.0;
    return rep;
}

// Writes losses.csv, summary.csv, curves/rep_<k>.csv and the two SVG plots;
// returns the created files. Deterministic bytes for a fixed report.
inline std::vector<std::filesystem::path> export_report(const ExperimentReport& report,
                                                        const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "curves", ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
    std::vector<fs::path> files;

    {
        auto out = open_for_write(dir / "losses.csv");
        out << "n,replication,sup_loss\n";
        for (const NSummary& s : report.per_n)
            for (std::size_t r = 0; r < s.losses.size(); ++r)
                out << s.n << "," << r << "," << format_double(s.losses[r]) << "\n";
        files.push_back(dir / "losses.csv");
    }
    {
        auto out = open_for_write(dir / "summary.csv");
        out << "n,q1,median,q3,whisker_lo,whisker_hi\n";
        for (const NSummary& s : report.per_n) {
            if (s.losses.empty()) continue;
            out << s.n << "," << format_double(s.q1) << "," << format_double(s.median) << ","
                << format_double(s.q3) << "," << format_double(s.whisker_lo) << ","
                << format_double(s.whisker_hi) << "\n";
        }
        files.push_back(dir / "summary.csv");
    }
    for (std::size_t k = 0; k < report.curves.size(); ++k) {
        const fs::path p = dir / "curves" / ("rep_" + std::to_string(k) + ".csv");
        write_estimate_csv(report.curves[k], p);
        files.push_back(p);
    }

    // overlay: true density in red over the replicated estimates in grey
    {
        svg::Frame f;
        f.x_lo = report.x_grid.empty() ? 0.0 : report.x_grid.front();
        f.x_hi = report.x_grid.empty() ? 1.0 : report.x_grid.back();
        double ymax = 0.0;
        for (double v : report.true_density) ymax = std::max(ymax, v);
        f.y_lo = -0.2 * ymax - 1e-9;
        f.y_hi = 1.8 * ymax + 1e-9;
        auto out = open_for_write(dir / "overlay.svg");
        svg::header(out, f);
        svg::axes(out, f, "x", "density");
        for (const DensityEstimate& c : report.curves)
            svg::polyline(out, f, c.x_grid, c.values, "grey", 0.8, 0.45);
        svg::polyline(out, f, report.x_grid, report.true_density, "red", 1.8, 1.0);
        out << "</svg>\n";
        files.push_back(dir / "overlay.svg");
    }
    // box plot of the loss per sample size
    {
        svg::Frame f;
        f.x_lo = -0.5;
        f.x_hi = static_cast<double>(report.per_n.size()) - 0.5;
        f.y_lo = 0.0;
        double ymax = 1e-9;
        for (const NSummary& s : report.per_n) ymax = std::max(ymax, s.whisker_hi);
        f.y_hi = 1.1 * ymax;
        auto out = open_for_write(dir / "boxplot.svg");
        svg::header(out, f);
        svg::axes(out, f, "sample size", "sup loss");
        for (std::size_t i = 0; i < report.per_n.size(); ++i) {
            const NSummary& s = report.per_n[i];
            const double cx = f.px(static_cast<double>(i));
            const double half = 0.3 * (f.px(1.0) - f.px(0.0));
            out << "<rect x=\"" << cx - half << "\" y=\"" << f.py(s.q3) << "\" width=\""
                << 2 * half << "\" height=\"" << (f.py(s.q1) - f.py(s.q3))
                << "\" fill=\"none\" stroke=\"black\"/>\n";
            out << "<line x1=\"" << cx - half << "\" y1=\"" << f.py(s.median) << "\" x2=\""
                << cx + half << "\" y2=\"" << f.py(s.median)
                << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
            for (double w : {s.whisker_lo, s.whisker_hi})
                out << "<line x1=\"" << cx - 0.5 * half << "\" y1=\"" << f.py(w) << "\" x2=\""
                    << cx + 0.5 * half << "\" y2=\"" << f.py(w) << "\" stroke=\"black\"/>\n";
            out << "<line x1=\"" << cx << "\" y1=\"" << f.py(s.whisker_lo) << "\" x2=\"" << cx
                << "\" y2=\"" << f.py(s.q1) << "\" stroke=\"black\"/>\n";
            out << "<line x1=\"" << cx << "\" y1=\"" << f.py(s.q3) << "\" x2=\"" << cx
                << "\" y2=\"" << f.py(s.whisker_hi) << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << cx << "\" y=\"" << f.py(f.y_lo) + 28
                << "\" font-size=\"10\" text-anchor=\"middle\">" << s.n << "</text>\n";
        }
        out << "</svg>\n";
        files.push_back(dir / "boxplot.svg");
    }
    return files;
}

}  // namespace mdv
