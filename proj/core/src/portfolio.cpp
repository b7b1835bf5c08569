#include "huberfactor/portfolio.hpp"

#include <cmath>

#include "huberfactor/errors.hpp"
#include "huberfactor/stats.hpp"

namespace huberfactor {

namespace {

constexpr double kRepairFloor = 1e-8;
constexpr double kDefinitenessTol = 1e-12;
constexpr double kQuantileLevels[] = {0.1, 0.25, 0.5, 0.75, 0.9};

}  // namespace

void BacktestConfig::validate() const {
    if (r < 1) throw ParameterError("BacktestConfig: r must be positive");
    if (window < r + 1) {
        throw ParameterError("BacktestConfig: window must be at least r + 1 = " + std::to_string(r + 1));
    }
    if (!(threshold_const >= 0.0)) throw ParameterError("BacktestConfig: threshold constant must be non-negative");
    huber.validate();
}

Matrix hard_threshold(const Matrix& s, double thr) {
    if (s.rows() != s.cols()) throw DimensionError("hard_threshold: matrix must be square");
    Matrix out = s;
    for (Index j = 0; j < s.cols(); ++j) {
        for (Index i = 0; i < s.rows(); ++i) {
            if (i != j && std::abs(s(i, j)) < thr) out(i, j) = 0.0;
        }
    }
    return out;
}

Matrix factor_covariance(const FactorFit& fit, Index window, double threshold_const) {
    if (fit.factors.rows() != window || fit.residuals.cols() != window) {
        throw DimensionError("factor_covariance: fit spans " + std::to_string(fit.factors.rows()) +
                             " periods, window is " + std::to_string(window));
    }
    if (!(threshold_const >= 0.0)) throw ParameterError("factor_covariance: threshold constant must be >= 0");
    const Index n = fit.loadings.rows();
    const double w = static_cast<double>(window);

    const Matrix factor_moment = fit.factors.transpose() * fit.factors / w;
    Matrix sigma = fit.loadings * factor_moment * fit.loadings.transpose();
    const Matrix resid_cov = fit.residuals * fit.residuals.transpose() / w;
    const double thr = threshold_const * std::sqrt(std::log(static_cast<double>(n)) / w);
    sigma += hard_threshold(resid_cov, thr);
    sigma = 0.5 * (sigma + sigma.transpose());

    const double floor = kRepairFloor * sigma.trace() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    if (es.eigenvalues().minCoeff() < floor && floor > 0.0) {
        const Vector clipped = es.eigenvalues().cwiseMax(floor);
        sigma = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        sigma = 0.5 * (sigma + sigma.transpose());
    }
    return sigma;
}

Vector min_variance_weights(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
        throw DimensionError("min_variance_weights: covariance must be square and non-empty");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    const double bottom = es.eigenvalues().minCoeff();
    if (!(top > 0.0) || bottom <= kDefinitenessTol * top) {
        throw DefinitenessError("min_variance_weights: covariance is not positive definite (smallest eigenvalue " +
                                std::to_string(bottom) + ")");
    }
    const Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw DefinitenessError("min_variance_weights: Cholesky factorization failed");
    }
    const Vector raw = llt.solve(Vector::Ones(sigma.rows()));
    return raw / raw.sum();
}

PerformanceStats performance_stats(std::span<const double> returns) {
    if (returns.empty()) throw ValidationError("performance_stats: no returns");
    PerformanceStats out;
    out.mean = mean(returns);
    out.sd = sample_sd(returns);
    if (returns.size() >= 2 && out.sd > 0.0) out.sharpe = out.mean / out.sd;
    for (double p : kQuantileLevels) out.quantiles[p] = quantile_linear(returns, p);
    return out;
}

BacktestReport rolling_backtest(const Panel& returns, const BacktestConfig& cfg) {
    cfg.validate();
    const Index total = returns.n_times();
    if (total <= cfg.window) {
        throw DimensionError("rolling_backtest: need more than window=" + std::to_string(cfg.window) +
                             " periods, panel has " + std::to_string(total));
    }
    if (cfg.r > std::min(returns.n_series(), cfg.window)) {
        throw DimensionError("rolling_backtest: r=" + std::to_string(cfg.r) + " exceeds min(N, window)");
    }
    const Index months = total - cfg.window;
    const Index n = returns.n_series();

    struct Month {
        bool ok = false;
        double value = 0.0;
        Vector weights;
    };
    std::vector<Month> results(static_cast<std::size_t>(months));
    parallel_for(static_cast<int>(months), cfg.threads, [&](int k) {
        const Index t = cfg.window + k;
        const Panel history = returns.time_slice(t - cfg.window, cfg.window);
        const FitResult fit = fit_method(history, cfg.r, cfg.method, cfg.huber);
        const Matrix sigma = factor_covariance(fit.fit, cfg.window, cfg.threshold_const);
        Month& out = results[static_cast<std::size_t>(k)];
        try {
            out.weights = min_variance_weights(sigma);
        } catch (const DefinitenessError&) {
            return;
        }
        out.value = out.weights.dot(returns.values().col(t));
        out.ok = true;
    });

    BacktestReport report;
    std::vector<double> realized;
    std::vector<Vector> kept;
    for (Index k = 0; k < months; ++k) {
        const Month& m = results[static_cast<std::size_t>(k)];
        const std::string& label = returns.time_ids()[static_cast<std::size_t>(cfg.window + k)];
        if (!m.ok) {
            report.skipped.push_back(label);
            continue;
        }
        report.times.push_back(label);
        realized.push_back(m.value);
        if (cfg.keep_weights) kept.push_back(m.weights);
    }
    if (realized.empty()) {
        throw DefinitenessError("rolling_backtest: no month produced a positive definite covariance");
    }
    report.oos_returns = Eigen::Map<const Vector>(realized.data(), static_cast<Index>(realized.size()));
    report.stats = performance_stats(realized);
    if (cfg.keep_weights) {
        report.weights.resize(static_cast<Index>(kept.size()), n);
        for (std::size_t k = 0; k < kept.size(); ++k) report.weights.row(static_cast<Index>(k)) = kept[k].transpose();
    }
    return report;
}

Vector equal_weight_returns(const Panel& returns, Index window) {
    if (window < 1 || returns.n_times() <= window) {
        throw DimensionError("equal_weight_returns: need more than window periods");
    }
    const Index months = returns.n_times() - window;
    return returns.values().rightCols(months).colwise().mean().transpose();
}

}  // namespace huberfactor
