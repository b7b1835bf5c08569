#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "huberfactor/estimators.hpp"

namespace huberfactor {

struct BacktestConfig {
    Index window = 72;
    Index r = 2;
    Method method = Method::ihr;
    double threshold_const = 0.5;  ///< C in C * sqrt(log N / window)
    HuberConfig huber;
    bool keep_weights = false;
    int threads = 1;

    void validate() const;
};

struct PerformanceStats {
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> sharpe;  ///< empty when sd == 0 or fewer than two returns
    std::map<double, double> quantiles;
};

struct BacktestReport {
    std::vector<std::string> times;  ///< labels of the out-of-sample months
    Vector oos_returns;
    PerformanceStats stats;
    std::vector<std::string> skipped;  ///< months whose covariance could not be made positive definite
    Matrix weights;                    ///< months x N, filled when keep_weights
};

/// Zeroes off-diagonal entries with |s_ij| < thr; the diagonal is kept.
Matrix hard_threshold(const Matrix& s, double thr);

/// C'C / window + hard_threshold(E'E / window, C_thr * sqrt(log N / window)),
/// with eigenvalues clipped up to 1e-8 * trace / N when needed.
Matrix factor_covariance(const FactorFit& fit, Index window, double threshold_const);

/// Sigma^{-1} 1 / (1' Sigma^{-1} 1). Throws DefinitenessError on non-PD input.
Vector min_variance_weights(const Matrix& sigma);

/// Mean, sample sd, Sharpe ratio (zero risk-free rate) and the 0.1/0.25/0.5/0.75/0.9 quantiles.
PerformanceStats performance_stats(std::span<const double> returns);

/// Rolling minimum-variance backtest: each month is allocated with weights
/// estimated from the preceding `window` months.
BacktestReport rolling_backtest(const Panel& returns, const BacktestConfig& cfg);

/// Out-of-sample returns of the 1/N portfolio over the same months as
/// rolling_backtest.
Vector equal_weight_returns(const Panel& returns, Index window);

}  // namespace huberfactor
