#include "huberfactor/io.hpp"

#include <fstream>
#include <ostream>

#include "huberfactor/errors.hpp"

namespace huberfactor {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

Json vector_json(const Vector& v) {
    Json arr = Json::array();
    for (Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
    return arr;
}

template <typename T>
T require(const Json& j, const char* key) {
    if (!j.contains(key)) throw DataError(std::string("JSON: missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("JSON: bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

Json to_json(const InnovationLaw& law) {
    Json j;
    using K = InnovationLaw::Kind;
    switch (law.kind) {
        case K::gaussian: j["kind"] = "gaussian"; break;
        case K::mvt: j["kind"] = "mvt"; break;
        case K::gaussian_factors_mvt_errors: j["kind"] = "gaussian_factors_mvt_errors"; break;
        case K::alpha_stable: j["kind"] = "alpha_stable"; break;
        case K::skew_t_factors_stable_errors: j["kind"] = "skew_t_factors_stable_errors"; break;
    }
    j["nu"] = law.nu;
    j["alpha"] = law.alpha;
    j["skew"] = law.skew;
    return j;
}

InnovationLaw innovation_law_from_json(const Json& j) {
    InnovationLaw law;
    const auto kind = require<std::string>(j, "kind");
    using K = InnovationLaw::Kind;
    if (kind == "gaussian") law.kind = K::gaussian;
    else if (kind == "mvt") law.kind = K::mvt;
    else if (kind == "gaussian_factors_mvt_errors") law.kind = K::gaussian_factors_mvt_errors;
    else if (kind == "alpha_stable") law.kind = K::alpha_stable;
    else if (kind == "skew_t_factors_stable_errors") law.kind = K::skew_t_factors_stable_errors;
    else throw DataError("JSON: unknown innovation law '" + kind + "'");
    law.nu = require<double>(j, "nu");
    law.alpha = require<double>(j, "alpha");
    law.skew = require<double>(j, "skew");
    return law;
}

Json to_json(const SimConfig& cfg) {
    Json j;
    j["N"] = cfg.n;
    j["T"] = cfg.t;
    j["r"] = cfg.r;
    j["theta"] = cfg.theta;
    j["rho"] = cfg.rho;
    j["beta"] = cfg.beta;
    j["J"] = cfg.j;
    j["dist"] = to_json(cfg.dist);
    j["seed"] = cfg.seed;
    return j;
}

SimConfig sim_config_from_json(const Json& j) {
    SimConfig cfg;
    cfg.n = require<Index>(j, "N");
    cfg.t = require<Index>(j, "T");
    cfg.r = require<Index>(j, "r");
    cfg.theta = require<double>(j, "theta");
    cfg.rho = require<double>(j, "rho");
    cfg.beta = require<double>(j, "beta");
    cfg.j = require<Index>(j, "J");
    if (!j.contains("dist")) throw DataError("JSON: missing key 'dist'");
    cfg.dist = innovation_law_from_json(j.at("dist"));
    cfg.seed = require<std::uint64_t>(j, "seed");
    return cfg;
}

Json to_json(const HuberConfig& cfg) {
    Json j;
    j["tau_policy"] = cfg.tau.kind == TauPolicy::Kind::fixed ? "fixed" : "mad_scaled";
    j["tau_value"] = cfg.tau.value;
    j["irls_tol"] = cfg.irls_tol;
    j["irls_max_iter"] = cfg.irls_max_iter;
    return j;
}

HuberConfig huber_config_from_json(const Json& j) {
    HuberConfig cfg;
    const auto policy = require<std::string>(j, "tau_policy");
    if (policy == "fixed") cfg.tau = TauPolicy::fixed(require<double>(j, "tau_value"));
    else if (policy == "mad_scaled") cfg.tau = TauPolicy::mad_scaled(require<double>(j, "tau_value"));
    else throw DataError("JSON: unknown tau policy '" + policy + "'");
    cfg.irls_tol = require<double>(j, "irls_tol");
    cfg.irls_max_iter = require<int>(j, "irls_max_iter");
    return cfg;
}

Json to_json(const RankEstimate& est) {
    Json j;
    j["r_hat"] = est.r_hat;
    j["sigma_diag"] = vector_json(est.sigma_diag);
    j["threshold"] = est.threshold;
    j["method"] = std::string(rank_method_name(est.method));
    return j;
}

Json to_json(const McReport& report) {
    Json j;
    j["scenario"] = to_json(report.scenario);
    j["replications"] = report.replications;
    j["seeds"] = report.seeds;
    Json methods = Json::array();
    for (const auto& m : report.methods) {
        Json e;
        e["method"] = m.method;
        if (m.rank_study) {
            e["mean_rhat"] = m.mean_rhat;
            e["under"] = m.under_count;
            e["over"] = m.over_count;
            e["r_hat"] = m.rhat;
        } else {
            e["mee_cc"] = m.mee_cc;
            e["mee_cc_iqr"] = m.mee_cc_iqr;
            e["ave_fl"] = m.ave_fl;
            e["ave_fl_sd"] = m.ave_fl_sd;
            e["ave_fs"] = m.ave_fs;
            e["ave_fs_sd"] = m.ave_fs_sd;
            Json reps = Json::array();
            for (const auto& r : m.replicates) reps.push_back(Json::array({r.cc_err, r.fl_dist, r.fs_dist}));
            e["replicates"] = std::move(reps);
        }
        e["failures"] = m.failures;
        Json log = Json::array();
        for (const auto& f : m.failure_log) log.push_back(Json{{"seed", f.seed}, {"message", f.message}});
        e["failure_log"] = std::move(log);
        methods.push_back(std::move(e));
    }
    j["methods"] = std::move(methods);
    return j;
}

Json to_json(const BacktestReport& report) {
    Json j;
    j["months"] = report.oos_returns.size();
    j["mean_return"] = report.stats.mean;
    j["sd_return"] = report.stats.sd;
    j["sharpe"] = report.stats.sharpe ? Json(*report.stats.sharpe) : Json(nullptr);
    Json q;
    for (const auto& [level, value] : report.stats.quantiles) q[format_double(level)] = value;
    j["quantiles"] = std::move(q);
    j["skipped_months"] = report.skipped;
    j["oos_returns"] = vector_json(report.oos_returns);
    return j;
}

void write_labelled_csv(const std::filesystem::path& path, const std::string& label_name,
                        const std::vector<std::string>& labels, const Matrix& values, const std::string& prefix) {
    if (static_cast<Index>(labels.size()) != values.rows()) {
        throw DimensionError("write_labelled_csv: label count does not match rows");
    }
    auto out = open_out(path);
    out << label_name;
    for (Index c = 0; c < values.cols(); ++c) out << ',' << prefix << (c + 1);
    out << '\n';
    for (Index r = 0; r < values.rows(); ++r) {
        out << labels[static_cast<std::size_t>(r)];
        for (Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
        out << '\n';
    }
}

Json fit_meta(const FitResult& result) {
    Json j;
    j["method"] = std::string(method_name(result.info.method));
    j["r"] = result.fit.rank;
    j["tau_policy"] = result.info.tau_policy;
    j["tau"] = result.info.tau;
    j["iterations"] = result.info.iterations;
    j["converged"] = result.info.converged;
    j["objective_trace"] = result.info.objective_trace;
    if (!result.info.half_sweep_trace.empty()) j["half_sweep_trace"] = result.info.half_sweep_trace;
    return j;
}

void write_fit_directory(const std::filesystem::path& dir, const Panel& panel, const FitResult& result) {
    std::filesystem::create_directories(dir);
    write_labelled_csv(dir / "loadings.csv", "series", panel.series_ids(), result.fit.loadings, "f");
    write_labelled_csv(dir / "factors.csv", "time", panel.time_ids(), result.fit.factors, "f");
    write_json_file(dir / "meta.json", fit_meta(result));
}

void write_mc_tables(std::ostream& fits, std::ostream& ranks, const McReport& report) {
    fits << "method,mee_cc,mee_cc_iqr,ave_fl,ave_fl_sd,ave_fs,ave_fs_sd\n";
    ranks << "method,mean_rhat,under,over\n";
    for (const auto& m : report.methods) {
        if (m.rank_study) {
            ranks << m.method << ',' << format_double(m.mean_rhat) << ',' << m.under_count << ',' << m.over_count
                  << '\n';
        } else {
            fits << m.method << ',' << format_double(m.mee_cc) << ',' << format_double(m.mee_cc_iqr) << ','
                 << format_double(m.ave_fl) << ',' << format_double(m.ave_fl_sd) << ',' << format_double(m.ave_fs)
                 << ',' << format_double(m.ave_fs_sd) << '\n';
        }
    }
}

void write_oos_returns_csv(const std::filesystem::path& path, const BacktestReport& report) {
    auto out = open_out(path);
    out << "time,return\n";
    for (Index k = 0; k < report.oos_returns.size(); ++k) {
        out << report.times[static_cast<std::size_t>(k)] << ',' << format_double(report.oos_returns(k)) << '\n';
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace huberfactor
