// Command-line front end: simulate stopped-process samples, run the SSE/GSSE
// density estimators, reproduce the Monte Carlo experiments, and check the
// lower-bound fixtures.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdv/harness.hpp"
#include "mdv/io.hpp"
#include "mdv/lower_bound.hpp"
#include "mdv/mellin.hpp"

namespace fs = std::filesystem;
using mdv::json;

namespace {

struct UsageError : mdv::Error {
    using Error::Error;
};

// ---- config schema --------------------------------------------------------
//
// {
//   "route": "sse" | "gsse" | "gsse-decomposed",
//   "dist":  {"kind": "gamma", "alpha": 2.0}
//          | {"kind": "gig", "lambda": 2.0, "chi": 1.41, "delta": 0.0}
//          | {"kind": "heavy_tail", "nu": 2.0},
//   "obs":   {"kind": "subordinated_bm"}
//          | {"kind": "variance_mean", "mu": 1.0, "sigma": 1.0}
//          | {"kind": "subordinated_stable", "alpha": 1.5},
//   "sse":   {"gamma": 0.8, "beta": 1.5708, "mode": "C",
//             "bandwidth_multiplier": 0.8, "clip": true},
//   "gsse":  {"gamma": 0.7, "beta": 1.5708, "epsilon": 0.5, "mode": "C",
//             "a_multiplier": 1.0, "u_multiplier": 3.0, "clip": true},
//   "n_list": [500, 1000], "replications": 100, "seed": 1,
//   "grid": {"x_min": 0.05, "x_max": 10.0, "points": 200},
//   "threads": 0
// }

json default_config() {
    return json{
        {"route", "sse"},
        {"dist",
         {{"kind", "gamma"},
          {"alpha", 2.0},
          {"lambda", 2.0},
          {"chi", 1.0},
          {"delta", 0.0},
          {"nu", 2.0}}},
        {"obs", {{"kind", "subordinated_bm"}, {"mu", 1.0}, {"sigma", 1.0}, {"alpha", 1.5}}},
        {"sse",
         {{"gamma", 0.8},
          {"beta", M_PI_2},
          {"mode", "C"},
          {"bandwidth_multiplier", 1.0},
          {"clip", false}}},
        {"gsse",
         {{"gamma", 0.7},
          {"beta", M_PI_2},
          {"epsilon", 0.5},
          {"mode", "C"},
          {"a_multiplier", 1.0},
          {"u_multiplier", 1.0},
          {"clip", false}}},
        {"n_list", json::array({1000})},
        {"replications", 50},
        {"seed", 1},
        {"grid", {{"x_min", 0.05}, {"x_max", 10.0}, {"points", 200}}},
        {"threads", 0},
    };
}

void merge_into(json& base, const json& patch) {
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge_into(base[it.key()], *it);
        else
            base[it.key()] = *it;
    }
}

void check_known_keys(const json& cfg, const json& schema, const std::string& prefix) {
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!schema.contains(it.key()))
            throw UsageError("unknown config key: " + prefix + it.key());
        if (it->is_object() && schema[it.key()].is_object())
            check_known_keys(*it, schema[it.key()], prefix + it.key() + ".");
    }
}

// overrides of the form "sse.gamma=0.75" or "replications=20"
void apply_override(json& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw UsageError("override must look like key=value: " + kv);
    const std::string path = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json* node = &cfg;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // plain string (e.g. route=sse)
    (*node)[parts.back()] = parsed;
}

mdv::TimeDistribution dist_from_json(const json& d) {
    const std::string kind = d.value("kind", "gamma");
    if (kind == "gamma") return mdv::TimeDistribution::gamma_time(d.value("alpha", 2.0));
    if (kind == "gig")
        return mdv::TimeDistribution::gig_time(d.value("lambda", 2.0), d.value("chi", 1.0),
                                               d.value("delta", 0.0));
    if (kind == "heavy_tail") return mdv::TimeDistribution::heavy_tail_time(d.value("nu", 2.0));
    throw UsageError("dist.kind must be gamma | gig | heavy_tail, got '" + kind + "'");
}

mdv::ObservationModel obs_from_json(const json& o) {
    const std::string kind = o.value("kind", "subordinated_bm");
    if (kind == "subordinated_bm") return mdv::ObservationModel::brownian();
    if (kind == "variance_mean")
        return mdv::ObservationModel::variance_mean_model(o.value("mu", 1.0),
                                                          o.value("sigma", 1.0));
    if (kind == "subordinated_stable")
        return mdv::ObservationModel::stable_model(o.value("alpha", 1.5));
    throw UsageError(
        "obs.kind must be subordinated_bm | variance_mean | subordinated_stable, got '" + kind +
        "'");
}

mdv::ExperimentSpec spec_from_json(const json& cfg) {
    mdv::ExperimentSpec spec;
    spec.route = mdv::route_from_string(cfg.at("route").get<std::string>());
    spec.dist = dist_from_json(cfg.at("dist"));
    spec.obs = obs_from_json(cfg.at("obs"));

    const json& s = cfg.at("sse");
    spec.sse.gamma_line = s.value("gamma", 0.8);
    spec.sse.beta = s.value("beta", M_PI_2);
    spec.sse.mode = mdv::smoothness_mode_from_string(s.value("mode", "C"));
    spec.sse.bandwidth_multiplier = s.value("bandwidth_multiplier", 1.0);
    spec.sse.clip_nonnegative = s.value("clip", false);

    const json& g = cfg.at("gsse");
    spec.gsse.gamma_line = g.value("gamma", 0.7);
    spec.gsse.beta = g.value("beta", M_PI_2);
    spec.gsse.epsilon = g.value("epsilon", 0.5);
    spec.gsse.mode = mdv::smoothness_mode_from_string(g.value("mode", "C"));
    spec.gsse.a_multiplier = g.value("a_multiplier", 1.0);
    spec.gsse.u_multiplier = g.value("u_multiplier", 1.0);
    spec.gsse.clip_nonnegative = g.value("clip", false);

    spec.n_list = cfg.at("n_list").get<std::vector<std::size_t>>();
    spec.replications = cfg.at("replications").get<std::size_t>();
    spec.master_seed = cfg.at("seed").get<std::uint64_t>();
    spec.grid.x_min = cfg.at("grid").value("x_min", 0.05);
    spec.grid.x_max = cfg.at("grid").value("x_max", 10.0);
    spec.grid.points = cfg.at("grid").value("points", std::size_t{200});
    spec.threads = cfg.at("threads").get<unsigned>();

    if (spec.route == mdv::Route::sse) {
        if (!(spec.sse.gamma_line > 0.75))
            throw UsageError("sse.gamma must exceed 3/4 for the sse route (got " +
                             std::to_string(spec.sse.gamma_line) + ")");
    } else {
        if (!(spec.gsse.gamma_line > 0.5 && spec.gsse.gamma_line < 1.0))
            throw UsageError("gsse.gamma must lie in (1/2, 1) (got " +
                             std::to_string(spec.gsse.gamma_line) + ")");
    }
    if (spec.n_list.empty()) throw UsageError("n_list must not be empty");
    return spec;
}

unsigned resolve_threads(std::optional<unsigned> flag, const json& cfg) {
    if (flag) return *flag;
    if (const char* env = std::getenv("MELLIN_DECONV_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0') return static_cast<unsigned>(v);
        throw UsageError("MELLIN_DECONV_THREADS is not a number");
    }
    return cfg.at("threads").get<unsigned>();
}

fs::path resolve_output(const std::string& output, bool create) {
    fs::path dir = output.empty() ? fs::path(".") : fs::path(output);
    if (!fs::exists(dir)) {
        if (!create)
            throw mdv::IoError("output directory does not exist (pass --create): " +
                               dir.string());
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw mdv::IoError("cannot create output directory: " + dir.string());
    }
    return dir;
}

// "gamma:2" / "gig:2,1.41,0" / "heavy_tail:2"
mdv::TimeDistribution dist_from_shorthand(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
    }
    if (kind == "gamma") return mdv::TimeDistribution::gamma_time(args.empty() ? 2.0 : args[0]);
    if (kind == "gig") {
        if (args.size() != 3) throw UsageError("gig shorthand needs gig:lambda,chi,delta");
        return mdv::TimeDistribution::gig_time(args[0], args[1], args[2]);
    }
    if (kind == "heavy_tail")
        return mdv::TimeDistribution::heavy_tail_time(args.empty() ? 2.0 : args[0]);
    throw UsageError("unknown distribution shorthand: " + text);
}

mdv::ObservationModel obs_from_shorthand(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
    }
    if (kind == "bm" || kind == "subordinated_bm") return mdv::ObservationModel::brownian();
    if (kind == "variance_mean") {
        if (args.size() != 2) throw UsageError("variance_mean shorthand needs mu,sigma");
        return mdv::ObservationModel::variance_mean_model(args[0], args[1]);
    }
    if (kind == "stable" || kind == "subordinated_stable")
        return mdv::ObservationModel::stable_model(args.empty() ? 1.5 : args[0]);
    throw UsageError("unknown observation shorthand: " + text);
}

int run_fixtures_check(std::ostream& out) {
    using namespace mdv;
    int failures = 0;
    auto row = [&](const std::string& name, bool pass, const std::string& detail) {
        out << (pass ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n";
        if (!pass) ++failures;
    };

    {
        const double v = std::abs(mellin_rho_m(PerturbVariant::poly, 3.0, cplx(1.0, 0.0)));
        row("mellin_rho_poly_vanishes_at_1", v < 1e-8, "|M[rho_M](1)| = " + format_double(v));
    }
    {
        const double quad = integrate_adaptive(
            [](double t) {
                return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI) * std::sin(3.0 * t);
            },
            -12.0, 12.0, {1e-13, 1e-11});
        row("rho_poly_integrates_to_zero", std::abs(quad) < 1e-8,
            "integral = " + format_double(quad));
    }
    {
        const cplx closed = mellin_rho_m(PerturbVariant::poly, 2.0, cplx(1.5, 0.5));
        const cplx quad = integrate_adaptive(
            [](double t) {
                return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI) * std::sin(2.0 * t) *
                       std::exp(cplx(0.5 * t, 0.5 * t));
            },
            -12.0, 12.0, QuadratureConfig{1e-12, 1e-10});
        row("mellin_rho_poly_closed_form", std::abs(closed - quad) < 1e-6,
            "|closed - quadrature| = " + format_double(std::abs(closed - quad)));
    }
    for (const char* variant : {"poly", "log"}) {
        const bool poly = std::string(variant) == "poly";
        const auto pair = poly ? build_pair(PerturbVariant::poly, 2.0, 5.0)
                               : build_pair(PerturbVariant::logarithmic, 1.5, 5.0);
        const double base_scale = poly ? 1.0 : 1.0 - pair.zeta;
        const double integral =
            integrate_adaptive(
                [&](double u) {
                    const double x = std::exp(u);
                    return base_scale * pair.q0(x) * x;
                },
                -25.0, 25.0, QuadratureConfig{1e-9, 1e-8}) +
            integrate_adaptive(
                [&](double u) {
                    const double x = std::exp(u);
                    return (pair.q1(x) - base_scale * pair.q0(x)) * x;
                },
                -20.0, 20.0, QuadratureConfig{1e-9, 1e-8});
        row(std::string("q1_normalized_") + variant, std::abs(integral - 1.0) < 1e-6,
            "integral = " + format_double(integral));
        double min_q1 = 1e300;
        for (double u = -5.0; u <= 7.0; u += 0.01)
            min_q1 = std::min(min_q1, pair.q1(std::exp(u)));
        row(std::string("q1_nonnegative_") + variant, min_q1 > -1e-9,
            "min over grid = " + format_double(min_q1));
    }
    {
        const auto pair = build_pair(PerturbVariant::poly, 2.0, 4.0);
        const cplx z(1.3, 0.7);
        const cplx factor = mellin_heavy_tail(2.0)(z) * mellin_rho_m(PerturbVariant::poly, 4.0, z);
        const cplx direct = integrate_adaptive(
            [&](double u) {
                const double x = std::exp(u);
                return pair.delta(x) * std::exp(cplx(u * (z.real() - 1.0), u * z.imag())) * x;
            },
            -14.0, 14.0, QuadratureConfig{1e-9, 1e-8});
        row("mellin_factorization", std::abs(factor - direct) < 1e-6,
            "|M[q]M[rho] - M[q v rho]| = " + format_double(std::abs(factor - direct)));
    }
    {
        const double p0_at_0 = mixture_density([](double l) { return l * std::exp(-l); }, 0.0);
        row("mixture_density_gamma_at_zero", std::abs(p0_at_0 - 1.0 / std::sqrt(2.0)) < 1e-8,
            "p(0) = " + format_double(p0_at_0) + " vs 1/sqrt(2)");
    }
    if (failures == 0)
        out << "all fixtures passed\n";
    else
        out << "fixture failures: " << failures << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-density recovery from stopped Levy processes via regularized "
                 "Mellin/Laplace inversion"};
    app.require_subcommand(0, 1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path, output, dist_text = "gamma:2", obs_text;
    std::string route_text = "sse", input_path;
    std::vector<std::string> overrides;
    std::optional<unsigned> threads_flag;
    unsigned long long seed = 1;
    std::size_t n = 1000;
    double gamma_line = 0.8, beta = M_PI_2, bandwidth_multiplier = 1.0, epsilon = 0.5;
    double a_mult = 1.0, u_mult = 1.0;
    bool create = false, print_config = false, clip = false;

    app.add_option("--config", config_path, "JSON config file (see README for the schema)");
    app.add_option("--set", overrides, "config overrides, key=value (e.g. sse.gamma=0.8)");
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--output,-o", output, "output directory");
    app.add_flag("--create", create, "create the output directory if missing");
    {
        auto* opt = app.add_option("--threads", "worker threads (0 = hardware)");
        opt->each([&](const std::string& s) { threads_flag = std::stoul(s); });
    }
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    auto* sim = app.add_subcommand("simulate", "draw random times and observations");
    sim->add_option("--dist", dist_text, "time distribution, e.g. gamma:2 gig:2,1.41,0 heavy_tail:2")
        ->capture_default_str();
    sim->add_option("--obs", obs_text, "observation model: bm | variance_mean:mu,sigma | stable:alpha");
    sim->add_option("--n", n, "sample size")->capture_default_str();

    auto* est = app.add_subcommand("estimate", "estimate the time density from a sample CSV");
    est->add_option("--route", route_text, "sse | gsse | gsse-decomposed")->capture_default_str();
    est->add_option("--input", input_path, "sample CSV (written by simulate)");
    est->add_option("--gamma", gamma_line, "inversion line")->capture_default_str();
    est->add_option("--beta", beta, "smoothness exponent")->capture_default_str();
    est->add_option("--multiplier", bandwidth_multiplier, "bandwidth multiplier (sse)")
        ->capture_default_str();
    est->add_option("--epsilon", epsilon, "integrability margin (gsse)")->capture_default_str();
    est->add_option("--a-mult", a_mult, "A_n multiplier (gsse)")->capture_default_str();
    est->add_option("--u-mult", u_mult, "U_n multiplier (gsse)")->capture_default_str();
    est->add_option("--obs", obs_text, "observation model used for gsse psi");
    est->add_flag("--clip", clip, "clip the estimate at zero");

    auto* exp_cmd = app.add_subcommand("experiment", "replicated estimation experiment");
    auto* rates = app.add_subcommand("rates", "experiment + log-log rate regression");
    auto* fixtures = app.add_subcommand("fixtures-check", "lower-bound fixture invariants");
    for (CLI::App* sub : {sim, est, exp_cmd, rates, fixtures}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            std::cout << app.help();
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        json cfg = default_config();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw mdv::IoError("cannot open config: " + config_path);
            json file_cfg = json::parse(in);
            check_known_keys(file_cfg, default_config(), "");
            merge_into(cfg, file_cfg);
        }
        for (const std::string& kv : overrides) apply_override(cfg, kv);
        check_known_keys(cfg, default_config(), "");
        if (app.count("--seed")) cfg["seed"] = seed;
        const unsigned threads = resolve_threads(threads_flag, cfg);
        cfg["threads"] = threads;

        if (print_config) {
            std::cout << cfg.dump(2) << "\n";
            return 0;
        }

        if (sim->parsed()) {
            const fs::path dir = resolve_output(output, create);
            const auto dist = dist_from_shorthand(dist_text);
            mdv::GigSampleInfo info;
            const mdv::SampleSet times =
                mdv::sample_times(dist, n, cfg["seed"].get<std::uint64_t>(), &info);
            mdv::write_sample_csv(times, dir / "times.csv");
            if (info.acceptance_rate < 1.0)
                std::cerr << "gig rejection acceptance rate: " << info.acceptance_rate << "\n";
            if (!obs_text.empty()) {
                const auto model = obs_from_shorthand(obs_text);
                const mdv::SampleSet xs = mdv::sample_observations(
                    times, model, mdv::derive_seed(cfg["seed"].get<std::uint64_t>(), 1));
                mdv::write_sample_csv(xs, dir / "observations.csv");
            }
            std::cerr << "wrote " << (dir / "times.csv").string()
                      << (obs_text.empty() ? "" : " and observations.csv") << "\n";
            return 0;
        }

        if (est->parsed()) {
            const mdv::Route route = mdv::route_from_string(route_text);
            if (route == mdv::Route::sse && !(gamma_line > 0.75))
                throw UsageError("gamma_line must exceed 3/4 for sse route");
            if (route != mdv::Route::sse && !(gamma_line > 0.5 && gamma_line < 1.0))
                throw UsageError("gamma_line must lie in (1/2,1) for gsse routes");
            if (input_path.empty()) throw UsageError("estimate requires --input");
            const fs::path dir = resolve_output(output, create);
            const mdv::SampleSet samples = mdv::read_sample_csv(input_path);
            mdv::GridSpec grid_spec;
            grid_spec.x_min = cfg["grid"]["x_min"].get<double>();
            grid_spec.x_max = cfg["grid"]["x_max"].get<double>();
            grid_spec.points = cfg["grid"]["points"].get<std::size_t>();
            const std::vector<double> grid = grid_spec.make();

            mdv::DensityEstimate out;
            if (route == mdv::Route::sse) {
                mdv::SseConfig sc;
                sc.gamma_line = gamma_line;
                sc.beta = beta;
                sc.bandwidth_multiplier = bandwidth_multiplier;
                sc.clip_nonnegative = clip;
                sc.n = samples.size();
                const double h =
                    mdv::bandwidth(samples.size(), sc.beta, sc.gamma_line, sc.mode,
                                   sc.bandwidth_multiplier);
                out = mdv::estimate_sse(samples, sc, h, grid);
            } else {
                mdv::GsseConfig gc;
                gc.gamma_line = gamma_line;
                gc.beta = beta;
                gc.epsilon = epsilon;
                gc.a_multiplier = a_mult;
                gc.u_multiplier = u_mult;
                gc.clip_nonnegative = clip;
                const auto model_kind =
                    obs_text.empty() ? mdv::ObservationModel::brownian()
                                     : obs_from_shorthand(obs_text);
                mdv::LevyModel model = mdv::LevyModel::brownian(1.0);
                if (model_kind.kind == mdv::ObservationModel::Kind::variance_mean)
                    model = mdv::LevyModel::brownian_drift(model_kind.mu, model_kind.sigma);
                else if (model_kind.kind == mdv::ObservationModel::Kind::subordinated_stable)
                    model = mdv::LevyModel::stable(model_kind.alpha);
                out = mdv::estimate_gsse(samples, model, gc, grid,
                                         route == mdv::Route::gsse_decomposed);
                if (out.params.count("remainder_bound"))
                    std::cerr << "decomposition remainder bound: "
                              << out.params["remainder_bound"] << "\n";
            }
            mdv::write_estimate_csv(out, dir / "density.csv");
            std::cerr << "wrote " << (dir / "density.csv").string() << "\n";
            return 0;
        }

        if (exp_cmd->parsed() || rates->parsed()) {
            mdv::ExperimentSpec spec = spec_from_json(cfg);
            spec.threads = threads;
            const mdv::ExperimentReport report = mdv::run_experiment(spec);
            if (rates->parsed()) {
                const mdv::RateFit fit = mdv::rate_regression({&report, 1});
                json out = {{"slope", fit.slope}, {"stderr", fit.stderr_slope}};
                for (const auto& s : report.per_n)
                    out["medians"][std::to_string(s.n)] = s.median;
                std::cout << out.dump(2) << "\n";
            } else {
                const fs::path dir = resolve_output(output, create);
                const auto files = mdv::export_report(report, dir);
                for (const auto& s : report.per_n)
                    std::cout << "n=" << s.n << " median_sup_loss=" << mdv::format_double(s.median)
                              << "\n";
                std::cerr << "wrote " << files.size() << " files under " << dir.string() << " in "
                          << report.runtime_seconds << "s\n";
            }
            return 0;
        }

        if (fixtures->parsed()) return run_fixtures_check(std::cout);

        std::cerr << "usage error: a subcommand is required (see --help)\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const mdv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
