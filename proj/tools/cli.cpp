#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "huberfactor/errors.hpp"
#include "huberfactor/io.hpp"
#include "huberfactor/stats.hpp"

namespace huberfactor::cli {

namespace fs = std::filesystem;

namespace {

struct HuberFlags {
    std::optional<double> tau;
    double tau_c = 1.345;
    int irls_max_iter = 100;
    double irls_tol = 1e-8;

    HuberConfig config() const {
        HuberConfig cfg;
        cfg.tau = tau ? TauPolicy::fixed(*tau) : TauPolicy::mad_scaled(tau_c);
        cfg.irls_max_iter = irls_max_iter;
        cfg.irls_tol = irls_tol;
        return cfg;
    }

    void echo(Json& j) const {
        j["tau"] = tau ? Json(*tau) : Json(nullptr);
        j["tau-c"] = tau_c;
        j["irls-max-iter"] = irls_max_iter;
        j["irls-tol"] = irls_tol;
    }
};

void add_huber_flags(CLI::App* sub, HuberFlags& h) {
    sub->add_option("--tau", h.tau, "Fixed Huber threshold (default: robust scale rule)")->check(CLI::PositiveNumber);
    sub->add_option("--tau-c", h.tau_c, "Constant c of the rule tau = c * 1.4826 * MAD")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--irls-max-iter", h.irls_max_iter, "IRLS iteration cap")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--irls-tol", h.irls_tol, "IRLS relative step tolerance")->capture_default_str()->check(
        CLI::PositiveNumber);
}

struct FitFlags {
    std::string input;
    std::string method;
    Index r = 0;
    int hpca_refine = 0;
    int max_iter = 30;
    double outer_tol = 1e-4;
    HuberFlags huber;
};

struct RankFlags {
    std::string input;
    std::string method;
    std::optional<Index> k;
    std::optional<double> p;
    std::string init = "pca";
    HuberFlags huber;
};

struct SimulateFlags {
    std::string scenario;
    int case_id = 0;
    Index n = 0;
    Index t = 0;
    std::uint64_t seed = 0;
};

struct McFlags {
    SimulateFlags sim;
    std::vector<std::string> methods;
    int reps = 0;
    std::optional<Index> k;
    std::optional<double> p;
    std::string init = "pca";
    HuberFlags huber;
};

struct BacktestFlags {
    std::string input;
    std::string method = "ihr";
    Index r = 2;
    Index window = 72;
    double thresh_const = 0.5;
    bool weights = false;
    HuberFlags huber;
};

struct Common {
    std::string out = ".";
    int threads = default_thread_count();
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--config", "run.json of an earlier run; explicit flags take precedence");
}

Json json_or_null(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void write_run_json(const Common& c, const std::string& subcommand, Json options) {
    options["out"] = c.out;
    options["threads"] = c.threads;
    Json run;
    run["subcommand"] = subcommand;
    run["options"] = std::move(options);
    write_json_file(fs::path(c.out) / "run.json", run);
}

std::string arg_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string joined;
        for (const auto& e : v) joined += (joined.empty() ? "" : ",") + arg_text(e);
        return joined;
    }
    return v.dump();
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

// Expands `--config run.json` into explicit flags for every option the
// command line does not already set.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) {
            path = args[k + 1];
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
        }
    }
    if (!path || args.empty()) return args;
    const Json run = read_json_file(*path);
    if (!run.contains("subcommand") || !run.contains("options") || !run.at("options").is_object()) {
        throw DataError("'" + *path + "' is not a run.json file");
    }
    if (run.at("subcommand") != args.front()) {
        throw ParameterError("--config: '" + *path + "' belongs to subcommand '" +
                             run.at("subcommand").get<std::string>() + "', not '" + args.front() + "'");
    }
    for (const auto& [key, value] : run.at("options").items()) {
        const std::string flag = "--" + key;
        if (value.is_null() || flag_given(args, flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
            continue;
        }
        args.push_back(flag);
        args.push_back(arg_text(value));
    }
    return args;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void cmd_fit(const FitFlags& f, const Common& c, std::ostream&) {
    const Panel panel = read_panel_csv(f.input);
    const Method method = parse_method(f.method);
    FitResult result;
    switch (method) {
        case Method::pca: result = fit_method(panel, f.r, Method::pca); break;
        case Method::hpca: {
            HpcaConfig cfg;
            cfg.refine_iters = f.hpca_refine;
            cfg.fixed_tau = f.huber.tau;
            result = fit_hpca(panel, f.r, cfg);
            break;
        }
        case Method::ihr: {
            IhrConfig cfg;
            cfg.huber = f.huber.config();
            cfg.outer_max_iter = f.max_iter;
            cfg.outer_tol = f.outer_tol;
            result = fit_ihr(panel, f.r, cfg);
            break;
        }
    }
    fs::create_directories(c.out);
    write_fit_directory(c.out, panel, result);

    Json opts;
    opts["input"] = f.input;
    opts["method"] = f.method;
    opts["r"] = f.r;
    opts["hpca-refine"] = f.hpca_refine;
    opts["max-iter"] = f.max_iter;
    opts["outer-tol"] = f.outer_tol;
    f.huber.echo(opts);
    write_run_json(c, "fit", std::move(opts));
}

void cmd_rank(const RankFlags& f, const Common& c, std::ostream& out) {
    const Panel panel = read_panel_csv(f.input);
    const RankMethod method = parse_rank_method(f.method);
    const Index k = f.k.value_or(default_rank_bound(panel.n_series(), panel.n_times()));
    if (f.p && !(*f.p > 0.0)) throw ParameterError("--P must be positive");
    const double p = f.p.value_or(default_threshold(panel.n_series(), panel.n_times()));
    const InitMethod init = parse_init_method(f.init);
    RankEstimate est;
    switch (method) {
        case RankMethod::rm_hpca: est = estimate_rank_rm(panel, k, Method::hpca, p, f.huber.config(), init); break;
        case RankMethod::rm_ihr: est = estimate_rank_rm(panel, k, Method::ihr, p, f.huber.config(), init); break;
        case RankMethod::er: est = estimate_rank_er(panel, k); break;
    }
    const Json j = to_json(est);
    fs::create_directories(c.out);
    write_json_file(fs::path(c.out) / "rank.json", j);
    out << j.dump(2) << '\n';

    Json opts;
    opts["input"] = f.input;
    opts["method"] = f.method;
    opts["k"] = k;
    opts["P"] = p;
    opts["init"] = f.init;
    f.huber.echo(opts);
    write_run_json(c, "rank", std::move(opts));
}

SimConfig resolve_scenario(const SimulateFlags& f) {
    if (f.scenario.size() != 1) {
        throw ParameterError("--scenario must be one of A, B, C, D, got '" + f.scenario + "'");
    }
    return scenario_config(f.scenario.front(), f.case_id, f.n, f.t, f.seed);
}

void echo_scenario(const SimulateFlags& f, Json& opts) {
    opts["scenario"] = f.scenario;
    opts["case"] = f.case_id;
    opts["n"] = f.n;
    opts["t"] = f.t;
    opts["seed"] = f.seed;
}

void cmd_simulate(const SimulateFlags& f, const Common& c, std::ostream&) {
    const SimConfig cfg = resolve_scenario(f);
    const GroundTruth truth = gen_scenario(cfg);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    write_panel_csv(dir / "panel.csv", truth.panel);
    write_labelled_csv(dir / "truth_loadings.csv", "series", truth.panel.series_ids(), truth.loadings, "f");
    write_labelled_csv(dir / "truth_factors.csv", "time", truth.panel.time_ids(), truth.factors, "f");
    Json config = to_json(cfg);
    config["scenario"] = f.scenario;
    config["case"] = f.case_id;
    write_json_file(dir / "config.json", config);

    Json opts;
    echo_scenario(f, opts);
    write_run_json(c, "simulate", std::move(opts));
}

void cmd_mc(const McFlags& f, const Common& c, std::ostream&) {
    const SimConfig cfg = resolve_scenario(f.sim);
    McOptions opt;
    opt.rank_k = f.k.value_or(default_rank_bound(cfg.n, cfg.t));
    opt.er_kmax = opt.rank_k;
    if (f.p && !(*f.p > 0.0)) throw ParameterError("--P must be positive");
    opt.threshold = f.p.value_or(default_threshold(cfg.n, cfg.t));
    opt.huber = f.huber.config();
    opt.rank_init = parse_init_method(f.init);
    opt.threads = c.threads;
    const McReport report = run_monte_carlo(cfg, f.methods, f.reps, f.sim.seed, opt);

    const fs::path dir = c.out;
    fs::create_directories(dir);
    write_json_file(dir / "mc_report.json", to_json(report));
    auto fits = open_output(dir / "mc_table.csv");
    auto ranks = open_output(dir / "mc_rank.csv");
    write_mc_tables(fits, ranks, report);

    Json opts;
    echo_scenario(f.sim, opts);
    opts["methods"] = f.methods;
    opts["reps"] = f.reps;
    opts["k"] = opt.rank_k;
    opts["P"] = *opt.threshold;
    opts["init"] = f.init;
    f.huber.echo(opts);
    write_run_json(c, "mc", std::move(opts));
}

void cmd_backtest(const BacktestFlags& f, const Common& c, std::ostream&) {
    const Panel panel = read_panel_csv(f.input);
    BacktestConfig cfg;
    cfg.method = parse_method(f.method);
    cfg.r = f.r;
    cfg.window = f.window;
    cfg.threshold_const = f.thresh_const;
    cfg.huber = f.huber.config();
    cfg.keep_weights = f.weights;
    cfg.threads = c.threads;
    const BacktestReport report = rolling_backtest(panel, cfg);

    const fs::path dir = c.out;
    fs::create_directories(dir);
    write_json_file(dir / "report.json", to_json(report));
    write_oos_returns_csv(dir / "oos_returns.csv", report);
    if (f.weights) {
        write_labelled_csv(dir / "weights.csv", "time", report.times, report.weights, "w");
    }

    Json opts;
    opts["input"] = f.input;
    opts["method"] = f.method;
    opts["r"] = f.r;
    opts["window"] = f.window;
    opts["thresh-const"] = f.thresh_const;
    opts["weights"] = f.weights;
    f.huber.echo(opts);
    write_run_json(c, "backtest", std::move(opts));
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust factor models with Huber loss"};
    app.name("huberfactor");
    app.require_subcommand(1);

    Common common;
    FitFlags fit;
    RankFlags rank;
    SimulateFlags sim;
    McFlags mc;
    BacktestFlags bt;

    const std::vector<std::string> fit_methods{"pca", "hpca", "ihr"};
    const std::vector<std::string> init_methods{"pca", "kendall"};
    const std::vector<std::string> scenarios{"A", "B", "C", "D"};

    auto* fit_cmd = app.add_subcommand("fit", "Estimate loadings and factors");
    fit_cmd->add_option("--input", fit.input, "Panel CSV")->required();
    fit_cmd->add_option("--method", fit.method, "Estimator")->required()->check(CLI::IsMember(fit_methods));
    fit_cmd->add_option("--r", fit.r, "Number of factors")->required()->check(CLI::PositiveNumber);
    fit_cmd->add_option("--hpca-refine", fit.hpca_refine, "Extra HPCA reweighting rounds")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--max-iter", fit.max_iter, "IHR outer sweep cap")->capture_default_str()->check(
        CLI::PositiveNumber);
    fit_cmd->add_option("--outer-tol", fit.outer_tol, "IHR relative change tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_huber_flags(fit_cmd, fit.huber);
    add_common(fit_cmd, common);

    auto* rank_cmd = app.add_subcommand("rank", "Estimate the number of factors");
    rank_cmd->add_option("--input", rank.input, "Panel CSV")->required();
    rank_cmd->add_option("--method", rank.method, "Selector")
        ->required()
        ->check(CLI::IsMember({"rm-hpca", "rm-ihr", "er"}));
    rank_cmd->add_option("--k", rank.k, "Over-specified rank (k_max for er)")->check(CLI::PositiveNumber);
    rank_cmd->add_option("--P", rank.p, "Threshold on diag(F'F/T) (default min(N,T)^(-1/3))");
    rank_cmd->add_option("--init", rank.init, "Starting fit for rm-*")
        ->capture_default_str()
        ->check(CLI::IsMember(init_methods));
    add_huber_flags(rank_cmd, rank.huber);
    add_common(rank_cmd, common);

    const auto add_scenario = [&](CLI::App* sub, SimulateFlags& s) {
        sub->add_option("--scenario", s.scenario, "Scenario A-D")->required()->check(CLI::IsMember(scenarios));
        sub->add_option("--case", s.case_id, "Case number")->required();
        sub->add_option("--n", s.n, "Number of series")->required()->check(CLI::PositiveNumber);
        sub->add_option("--t", s.t, "Number of periods")->required()->check(CLI::PositiveNumber);
        sub->add_option("--seed", s.seed, "Master seed")->required();
    };
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic panel with its ground truth");
    add_scenario(sim_cmd, sim);
    add_common(sim_cmd, common);

    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study over seeded replications");
    add_scenario(mc_cmd, mc.sim);
    mc_cmd->add_option("--methods", mc.methods, "Comma-separated methods")->required()->delimiter(',');
    mc_cmd->add_option("--reps", mc.reps, "Replications")->required()->check(CLI::PositiveNumber);
    mc_cmd->add_option("--k", mc.k, "Over-specified rank for rm-* and k_max for er")->check(CLI::PositiveNumber);
    mc_cmd->add_option("--P", mc.p, "Threshold on diag(F'F/T) (default min(N,T)^(-1/3))");
    mc_cmd->add_option("--init", mc.init, "Starting fit for rm-*")
        ->capture_default_str()
        ->check(CLI::IsMember(init_methods));
    add_huber_flags(mc_cmd, mc.huber);
    add_common(mc_cmd, common);

    auto* bt_cmd = app.add_subcommand("backtest", "Rolling minimum-variance backtest");
    bt_cmd->add_option("--input", bt.input, "Panel CSV of returns")->required();
    bt_cmd->add_option("--method", bt.method, "Estimator")->capture_default_str()->check(CLI::IsMember(fit_methods));
    bt_cmd->add_option("--r", bt.r, "Number of factors")->capture_default_str()->check(CLI::PositiveNumber);
    bt_cmd->add_option("--window", bt.window, "Estimation window")->capture_default_str()->check(
        CLI::PositiveNumber);
    bt_cmd->add_option("--thresh-const", bt.thresh_const, "Constant C of the residual threshold")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    bt_cmd->add_flag("--weights", bt.weights, "Also write weights.csv");
    add_huber_flags(bt_cmd, bt.huber);
    add_common(bt_cmd, common);

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
        if (fit_cmd->parsed()) cmd_fit(fit, common, out);
        else if (rank_cmd->parsed()) cmd_rank(rank, common, out);
        else if (sim_cmd->parsed()) cmd_simulate(sim, common, out);
        else if (mc_cmd->parsed()) cmd_mc(mc, common, out);
        else if (bt_cmd->parsed()) cmd_backtest(bt, common, out);
        return ok;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const ValidationError& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << '\n';
        return numerical_error;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(args, out, err);
}

}  // namespace huberfactor::cli
