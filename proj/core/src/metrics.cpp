#include "huberfactor/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "huberfactor/errors.hpp"
#include "huberfactor/stats.hpp"

namespace huberfactor {

namespace {

constexpr double kOrthonormalTol = 1e-8;

std::vector<double> column(const std::vector<ReplicationErrors>& reps, double ReplicationErrors::*field) {
    std::vector<double> out;
    out.reserve(reps.size());
    for (const auto& r : reps) out.push_back(r.*field);
    return out;
}

void aggregate(MethodReport& report, Index true_rank) {
    if (report.rank_study) {
        if (report.rhat.empty()) return;
        double total = 0.0;
        for (Index r : report.rhat) {
            total += static_cast<double>(r);
            if (r < true_rank) ++report.under_count;
            if (r > true_rank) ++report.over_count;
        }
        report.mean_rhat = total / static_cast<double>(report.rhat.size());
        return;
    }
    if (report.replicates.empty()) return;
    const auto cc = column(report.replicates, &ReplicationErrors::cc_err);
    const auto fl = column(report.replicates, &ReplicationErrors::fl_dist);
    const auto fs = column(report.replicates, &ReplicationErrors::fs_dist);
    report.mee_cc = median(cc);
    report.mee_cc_iqr = iqr(cc);
    report.ave_fl = mean(fl);
    report.ave_fl_sd = sample_sd(fl);
    report.ave_fs = mean(fs);
    report.ave_fs_sd = sample_sd(fs);
}

// Outcome of one method on one replication.
struct Outcome {
    bool ok = false;
    ReplicationErrors errors;
    Index rhat = 0;
    std::string message;
};

Outcome run_method(const std::string& method, const GroundTruth& truth, Index true_rank, const McOptions& opt) {
    Outcome out;
    try {
        if (method == "er") {
            out.rhat = estimate_rank_er(truth.panel, opt.er_kmax).r_hat;
        } else if (method == "rm-hpca" || method == "rm-ihr") {
            const Method m = method == "rm-hpca" ? Method::hpca : Method::ihr;
            out.rhat = estimate_rank_rm(truth.panel, opt.rank_k, m, opt.threshold, opt.huber, opt.rank_init).r_hat;
        } else {
            const FitResult fit = fit_method(truth.panel, true_rank, parse_method(method), opt.huber);
            out.errors = replication_errors(fit.fit, truth);
        }
        out.ok = true;
    } catch (const Error& e) {
        out.message = e.what();
    }
    return out;
}

}  // namespace

Matrix orthonormal_basis(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

double subspace_distance(const Matrix& o1, const Matrix& o2) {
    if (o1.rows() != o2.rows()) {
        throw DimensionError("subspace_distance: arguments live in R^" + std::to_string(o1.rows()) + " and R^" +
                             std::to_string(o2.rows()));
    }
    if (o1.cols() < 1 || o2.cols() < 1) throw DimensionError("subspace_distance: empty basis");
    if (orthonormality_defect(o1) > kOrthonormalTol || orthonormality_defect(o2) > kOrthonormalTol) {
        throw ValidationError("subspace_distance: arguments must be column-orthonormal");
    }
    // q - ||O1'O2||^2 = (q - q_small) + ||(I - P_big) O_small||^2, which keeps
    // precision when the spaces nearly coincide.
    const Matrix& small = o1.cols() <= o2.cols() ? o1 : o2;
    const Matrix& big = o1.cols() <= o2.cols() ? o2 : o1;
    const double q = static_cast<double>(big.cols());
    const double gap = static_cast<double>(big.cols() - small.cols()) +
                       (small - big * (big.transpose() * small)).squaredNorm();
    return std::sqrt(std::clamp(gap / q, 0.0, 1.0));
}

ReplicationErrors replication_errors(const FactorFit& fit, const GroundTruth& truth) {
    if (fit.loadings.rows() != truth.loadings.rows() || fit.factors.rows() != truth.factors.rows()) {
        throw DimensionError("replication_errors: fit and truth shapes differ");
    }
    const Matrix true_common = truth.loadings * truth.factors.transpose();
    const double denom = true_common.squaredNorm();
    if (!(denom > 0.0)) throw ValidationError("replication_errors: true common component is zero");
    ReplicationErrors out;
    out.cc_err = (fit.common_component() - true_common).squaredNorm() / denom;
    out.fl_dist = subspace_distance(orthonormal_basis(fit.loadings), orthonormal_basis(truth.loadings));
    out.fs_dist = subspace_distance(orthonormal_basis(fit.factors), orthonormal_basis(truth.factors));
    return out;
}

const std::vector<std::string>& known_mc_methods() {
    static const std::vector<std::string> names{"pca", "hpca", "ihr", "rm-hpca", "rm-ihr", "er"};
    return names;
}

bool is_fit_method(const std::string& name) { return name == "pca" || name == "hpca" || name == "ihr"; }

bool is_rank_method(const std::string& name) { return name == "rm-hpca" || name == "rm-ihr" || name == "er"; }

const MethodReport& McReport::method(const std::string& name) const {
    for (const auto& m : methods) {
        if (m.method == name) return m;
    }
    throw ParameterError("McReport: no method '" + name + "'");
}

std::uint64_t replication_seed(std::uint64_t master_seed, int m) {
    return derive_seed(master_seed, 0x6d63ULL, static_cast<std::uint64_t>(m));
}

McReport run_monte_carlo(const SimConfig& scenario, const std::vector<std::string>& methods, int replications,
                         std::uint64_t master_seed, const McOptions& options) {
    if (replications < 1) throw ParameterError("run_monte_carlo: need at least one replication");
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(replications));
    for (int m = 0; m < replications; ++m) seeds.push_back(replication_seed(master_seed, m));
    return run_monte_carlo_with_seeds(scenario, methods, seeds, options);
}

McReport run_monte_carlo_with_seeds(const SimConfig& scenario, const std::vector<std::string>& methods,
                                    const std::vector<std::uint64_t>& seeds, const McOptions& options) {
    if (seeds.empty()) throw ParameterError("run_monte_carlo: need at least one replication");
    if (methods.empty()) throw ParameterError("run_monte_carlo: empty method list");
    for (const auto& m : methods) {
        if (!is_fit_method(m) && !is_rank_method(m)) {
            throw ParameterError("run_monte_carlo: unknown method '" + m +
                                 "' (valid: pca, hpca, ihr, rm-hpca, rm-ihr, er)");
        }
    }
    scenario.validate();

    const int count = static_cast<int>(seeds.size());
    const std::size_t n_methods = methods.size();
    std::vector<Outcome> outcomes(static_cast<std::size_t>(count) * n_methods);
    parallel_for(count, options.threads, [&](int m) {
        SimConfig cfg = scenario;
        cfg.seed = seeds[static_cast<std::size_t>(m)];
        const GroundTruth truth = gen_scenario(cfg);
        for (std::size_t k = 0; k < n_methods; ++k) {
            outcomes[static_cast<std::size_t>(m) * n_methods + k] = run_method(methods[k], truth, scenario.r, options);
        }
    });

    McReport report;
    report.scenario = scenario;
    report.replications = count;
    report.seeds = seeds;
    for (std::size_t k = 0; k < n_methods; ++k) {
        MethodReport mr;
        mr.method = methods[k];
        mr.rank_study = is_rank_method(methods[k]);
        for (int m = 0; m < count; ++m) {
            const Outcome& o = outcomes[static_cast<std::size_t>(m) * n_methods + k];
            if (!o.ok) {
                ++mr.failures;
                mr.failure_log.push_back({seeds[static_cast<std::size_t>(m)], o.message});
            } else if (mr.rank_study) {
                mr.rhat.push_back(o.rhat);
            } else {
                mr.replicates.push_back(o.errors);
            }
        }
        aggregate(mr, scenario.r);
        report.methods.push_back(std::move(mr));
    }
    return report;
}

double normal_qq_correlation(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw ValidationError("normal_qq_correlation: need at least two values");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const boost::math::normal_distribution<double> standard;
    std::vector<double> q(n);
    for (std::size_t k = 0; k < n; ++k) {
        q[k] = boost::math::quantile(standard, (static_cast<double>(k + 1) - 0.375) / (static_cast<double>(n) + 0.25));
    }
    const double mx = mean(sorted);
    const double mq = mean(q);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxy += (sorted[k] - mx) * (q[k] - mq);
        sxx += (sorted[k] - mx) * (sorted[k] - mx);
        syy += (q[k] - mq) * (q[k] - mq);
    }
    if (!(sxx > 0.0)) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

NormalityProbe normality_probe(const SimConfig& scenario, Index series, int replications,
                               std::uint64_t master_seed, const IhrConfig& ihr, int threads,
                               ProbeAlignment alignment) {
    scenario.validate();
    if (!scenario.dist.finite_variance()) {
        throw ParameterError("normality_probe: " + scenario.dist.name() +
                             " innovations have infinite variance; the loading CLT needs bounded second moments");
    }
    if (replications < 2) {
        throw ValidationError("normality_probe: need at least 2 replications to standardize, got " +
                              std::to_string(replications));
    }
    if (series < 0 || series >= scenario.n) {
        throw DimensionError("normality_probe: series index " + std::to_string(series) + " outside [0, " +
                             std::to_string(scenario.n) + ")");
    }
    const Index r = scenario.r;
    const double root_t = std::sqrt(static_cast<double>(scenario.t));

    NormalityProbe out;
    out.samples.resize(replications, r);
    parallel_for(replications, threads, [&](int m) {
        SimConfig cfg = scenario;
        cfg.seed = replication_seed(master_seed, m);
        const GroundTruth truth = gen_scenario(cfg);
        const NormalizedFactors identified = normalize_fit(truth.loadings, truth.factors);
        const FitResult fit = fit_ihr(truth.panel, r, ihr);
        const Matrix& l0 = identified.loadings;
        Matrix align;
        if (alignment == ProbeAlignment::sign) {
            align = sign_align(fit.fit.factors, identified.factors).diag.asDiagonal();
        } else {
            align = (l0.transpose() * l0).ldlt().solve(l0.transpose() * fit.fit.loadings);
        }
        out.samples.row(m) = root_t * (fit.fit.loadings.row(series) - l0.row(series) * align);
    });

    out.mean_z.resize(r);
    out.qq_corr = 1.0;
    for (Index j = 0; j < r; ++j) {
        const Vector col = out.samples.col(j);
        const std::span<const double> values(col.data(), static_cast<std::size_t>(col.size()));
        const double sd = sample_sd(values);
        out.mean_z(j) = sd > 0.0 ? mean(values) / sd : 0.0;
        out.qq_corr = std::min(out.qq_corr, normal_qq_correlation(values));
    }
    return out;
}

}  // namespace huberfactor
