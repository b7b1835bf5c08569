#include "huberfactor/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "huberfactor/errors.hpp"

namespace huberfactor {

namespace {

constexpr double kTauFloor = 1e-12;
constexpr double kLoadingsOrthoTol = 1e-8;

void require_rank(const Panel& panel, Index r, const char* who) {
    const Index limit = std::min(panel.n_series(), panel.n_times());
    if (r < 1 || r > limit) {
        throw DimensionError(std::string(who) + ": rank r=" + std::to_string(r) + " outside [1, min(N,T)=" +
                             std::to_string(limit) + "]");
    }
}

// sqrt(N) * leading eigenvectors of `moment`, factors by projection, identified.
FactorFit principal_fit(const Panel& panel, const Matrix& moment, Index r) {
    const double n = static_cast<double>(panel.n_series());
    const EigenPair eig = top_eigen(moment, r);
    Matrix loadings = std::sqrt(n) * eig.vectors;
    Matrix factors = panel.values().transpose() * loadings / n;
    return make_fit(panel, normalize_fit(loadings, factors));
}

Vector projection_residual_norms(const Panel& panel, const Matrix& loadings) {
    const double n = static_cast<double>(panel.n_series());
    const Matrix& y = panel.values();
    const Matrix resid = y - loadings * (loadings.transpose() * y / n);
    return resid.colwise().norm().transpose();
}

double median_of(Vector v) {
    const Index n = v.size();
    std::sort(v.data(), v.data() + n);
    return n % 2 == 1 ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

double elementwise_objective(const Matrix& y, const Matrix& loadings, const Matrix& factors, double tau) {
    const Matrix resid = y - loadings * factors.transpose();
    double total = 0.0;
    for (Index t = 0; t < resid.cols(); ++t) {
        for (Index i = 0; i < resid.rows(); ++i) {
            const double a = std::abs(resid(i, t));
            total += a <= tau ? 0.5 * a * a : tau * a - 0.5 * tau * tau;
        }
    }
    return total / static_cast<double>(resid.size());
}

std::string describe_policy(const TauPolicy& p) {
    return (p.kind == TauPolicy::Kind::fixed ? "fixed(" : "mad_scaled(") + format_double(p.value) + ")";
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::pca: return "pca";
        case Method::hpca: return "hpca";
        case Method::ihr: return "ihr";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "pca") return Method::pca;
    if (name == "hpca") return Method::hpca;
    if (name == "ihr") return Method::ihr;
    throw ParameterError("unknown method '" + std::string(name) + "' (valid: pca, hpca, ihr)");
}

FactorFit fit_pca(const Panel& panel, Index r) {
    require_rank(panel, r, "fit_pca");
    return principal_fit(panel, second_moment(panel), r);
}

std::string_view init_method_name(InitMethod m) { return m == InitMethod::pca ? "pca" : "kendall"; }

InitMethod parse_init_method(std::string_view name) {
    if (name == "pca") return InitMethod::pca;
    if (name == "kendall") return InitMethod::kendall;
    throw ParameterError("unknown initializer '" + std::string(name) + "' (valid: pca, kendall)");
}

Matrix spatial_kendall_moment(const Panel& panel) {
    const Matrix& y = panel.values();
    const Index n = panel.n_series();
    const Index t_count = panel.n_times();
    if (t_count < 2) throw DimensionError("spatial_kendall_moment: need at least two periods");
    Matrix acc = Matrix::Zero(n, n);
    Matrix diffs(n, t_count);
    double pairs = 0.0;
    for (Index s = 0; s + 1 < t_count; ++s) {
        Index used = 0;
        for (Index t = s + 1; t < t_count; ++t) {
            const double norm = (y.col(t) - y.col(s)).norm();
            if (norm == 0.0) continue;
            diffs.col(used++) = (y.col(t) - y.col(s)) / norm;
        }
        if (used > 0) acc.selfadjointView<Eigen::Lower>().rankUpdate(diffs.leftCols(used));
        pairs += static_cast<double>(used);
    }
    if (pairs == 0.0) throw DegeneracyError("spatial_kendall_moment: all observations are identical");
    return Matrix(acc.selfadjointView<Eigen::Lower>()) / pairs;
}

FactorFit fit_kendall(const Panel& panel, Index r) {
    require_rank(panel, r, "fit_kendall");
    return principal_fit(panel, spatial_kendall_moment(panel), r);
}

FactorFit initial_fit(const Panel& panel, Index r, InitMethod init) {
    return init == InitMethod::pca ? fit_pca(panel, r) : fit_kendall(panel, r);
}

WeightVector hpca_weights(const Panel& panel, const FactorFit& fit, double tau) {
    if (!(tau > 0.0)) {
        throw ParameterError("hpca_weights: tau must be positive, got " + std::to_string(tau));
    }
    if (fit.loadings.rows() != panel.n_series()) {
        throw DimensionError("hpca_weights: loadings do not match the panel");
    }
    const double n = static_cast<double>(panel.n_series());
    if (orthonormality_defect(fit.loadings, n) > kLoadingsOrthoTol) {
        throw ValidationError("hpca_weights: loadings must satisfy L'L/N = I");
    }
    const Vector rho = projection_residual_norms(panel, fit.loadings);
    WeightVector out;
    out.w.resize(rho.size());
    for (Index t = 0; t < rho.size(); ++t) {
        out.w(t) = rho(t) <= tau ? 0.5 : tau / (2.0 * rho(t));
    }
    return out;
}

FitResult fit_hpca(const Panel& panel, Index r, const HpcaConfig& cfg) {
    require_rank(panel, r, "fit_hpca");
    if (cfg.refine_iters < 0) throw ParameterError("fit_hpca: refine_iters must be >= 0");
    if (cfg.fixed_tau && !(*cfg.fixed_tau > 0.0)) throw ParameterError("fit_hpca: fixed tau must be positive");

    FactorFit current = cfg.initial ? make_fit(panel, *cfg.initial) : fit_pca(panel, r);
    if (current.rank != r) {
        throw DimensionError("fit_hpca: initial fit has rank " + std::to_string(current.rank) + ", expected " +
                             std::to_string(r));
    }

    FitResult out;
    out.info.method = Method::hpca;
    out.info.tau_policy = cfg.fixed_tau ? "fixed(" + format_double(*cfg.fixed_tau) + ")" : "median_residual_norm";

    const Matrix& y = panel.values();
    const double t_count = static_cast<double>(panel.n_times());
    for (int pass = 0; pass <= cfg.refine_iters; ++pass) {
        const double tau =
            cfg.fixed_tau ? *cfg.fixed_tau
                          : std::max(median_of(current.residuals.colwise().norm().transpose()), kTauFloor);
        const WeightVector weights = hpca_weights(panel, current, tau);

        Matrix weighted = Matrix::Zero(panel.n_series(), panel.n_series());
        const Matrix scaled = y * weights.w.cwiseSqrt().asDiagonal();
        weighted.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0 / t_count);
        const Matrix moment = weighted.selfadjointView<Eigen::Lower>();

        current = principal_fit(panel, moment, r);
        out.info.tau = tau;
        out.info.iterations = pass + 1;
        out.info.objective_trace.push_back(
            eval_objectives(panel, current.loadings, current.factors, tau).vector_huber);
    }
    out.fit = std::move(current);
    return out;
}

FitResult fit_ihr(const Panel& panel, Index r, const IhrConfig& cfg) {
    require_rank(panel, r, "fit_ihr");
    cfg.huber.validate();
    if (cfg.outer_max_iter < 1) throw ParameterError("fit_ihr: outer_max_iter must be >= 1");
    if (!(cfg.outer_tol > 0.0)) throw ParameterError("fit_ihr: outer_tol must be positive");

    const Matrix& y = panel.values();
    const Index n = panel.n_series();
    const Index t_count = panel.n_times();

    FactorFit start = cfg.initial ? make_fit(panel, *cfg.initial) : fit_pca(panel, r);
    if (start.rank != r) {
        throw DimensionError("fit_ihr: initial fit has rank " + std::to_string(start.rank) + ", expected " +
                             std::to_string(r));
    }
    Matrix loadings = std::move(start.loadings);
    Matrix factors = std::move(start.factors);

    FitResult out;
    out.info.method = Method::ihr;
    out.info.converged = false;
    out.info.tau_policy = describe_policy(cfg.huber.tau);
    if (cfg.huber.tau.kind == TauPolicy::Kind::fixed) {
        out.info.tau = cfg.huber.tau.value;
    } else {
        const Vector all = start.residuals.reshaped();
        const double scale = std::sqrt(y.squaredNorm() / static_cast<double>(y.size()));
        out.info.tau = mad_tau(all, cfg.huber.tau.value, scale > 0.0 ? scale : 1.0);
    }
    const double trace_tau = out.info.tau;
    out.info.objective_trace.push_back(elementwise_objective(y, loadings, factors, trace_tau));
    out.info.half_sweep_trace.push_back(out.info.objective_trace.back());

    Matrix common = loadings * factors.transpose();
    for (int sweep = 1; sweep <= cfg.outer_max_iter; ++sweep) {
        for (Index i = 0; i < n; ++i) {
            try {
                loadings.row(i) =
                    huber_regress(y.row(i).transpose(), factors, cfg.huber, Vector(loadings.row(i).transpose()))
                        .coef.transpose();
            } catch (const DegeneracyError& e) {
                throw DegeneracyError("fit_ihr: loading regression for series " + panel.series_ids()[i] +
                                      " (index " + std::to_string(i) + ") failed: " + e.what());
            }
        }
        out.info.half_sweep_trace.push_back(elementwise_objective(y, loadings, factors, trace_tau));

        for (Index t = 0; t < t_count; ++t) {
            try {
                factors.row(t) =
                    huber_regress(y.col(t), loadings, cfg.huber, Vector(factors.row(t).transpose())).coef.transpose();
            } catch (const DegeneracyError& e) {
                throw DegeneracyError("fit_ihr: factor regression for time " + panel.time_ids()[t] + " (index " +
                                      std::to_string(t) + ") failed: " + e.what());
            }
        }
        out.info.half_sweep_trace.push_back(elementwise_objective(y, loadings, factors, trace_tau));

        NormalizedFactors normalized = normalize_fit(loadings, factors);
        loadings = std::move(normalized.loadings);
        factors = std::move(normalized.factors);
        out.info.objective_trace.push_back(elementwise_objective(y, loadings, factors, trace_tau));
        out.info.iterations = sweep;

        Matrix next = loadings * factors.transpose();
        const double base = common.norm();
        const double change = (next - common).norm() / (base > 0.0 ? base : 1.0);
        common = std::move(next);
        if (change < cfg.outer_tol) {
            out.info.converged = true;
            break;
        }
    }
    out.fit = make_fit(panel, {std::move(loadings), std::move(factors)});
    return out;
}

FitResult fit_method(const Panel& panel, Index r, Method method, const HuberConfig& huber) {
    switch (method) {
        case Method::pca: {
            FitResult out{fit_pca(panel, r), {}};
            out.info.method = Method::pca;
            out.info.tau_policy = "none";
            return out;
        }
        case Method::hpca: return fit_hpca(panel, r);
        case Method::ihr: {
            IhrConfig cfg;
            cfg.huber = huber;
            return fit_ihr(panel, r, cfg);
        }
    }
    throw ParameterError("fit_method: unknown method");
}

Objectives eval_objectives(const Panel& panel, const Matrix& loadings, const Matrix& factors, double tau) {
    if (!(tau > 0.0)) {
        throw ParameterError("eval_objectives: tau must be positive, got " + std::to_string(tau));
    }
    if (loadings.rows() != panel.n_series() || factors.rows() != panel.n_times() ||
        loadings.cols() != factors.cols()) {
        throw DimensionError("eval_objectives: factor shapes do not match the panel");
    }
    const Matrix resid = panel.values() - loadings * factors.transpose();
    double vec_total = 0.0;
    for (Index t = 0; t < resid.cols(); ++t) {
        const double a = resid.col(t).norm();
        vec_total += a <= tau ? 0.5 * a * a : tau * a - 0.5 * tau * tau;
    }
    return {vec_total / static_cast<double>(resid.cols()),
            elementwise_objective(panel.values(), loadings, factors, tau)};
}

}  // namespace huberfactor
