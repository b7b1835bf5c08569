#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "huberfactor/huber.hpp"
#include "huberfactor/panel_core.hpp"

namespace huberfactor {

enum class Method { pca, hpca, ihr };

std::string_view method_name(Method m);
/// Parses "pca" / "hpca" / "ihr"; throws ParameterError otherwise.
Method parse_method(std::string_view name);

struct HpcaConfig {
    /// Extra passes of the reweighting step after the first (0 = single pass).
    int refine_iters = 0;
    /// When set, tau is this constant; otherwise the median of the residual norms.
    std::optional<double> fixed_tau;
    /// User-supplied starting fit; PCA is used when absent.
    std::optional<NormalizedFactors> initial;
};

struct IhrConfig {
    HuberConfig huber;
    int outer_max_iter = 30;
    double outer_tol = 1e-4;  ///< relative Frobenius change of L F'
    /// User-supplied starting fit; PCA is used when absent.
    std::optional<NormalizedFactors> initial;
};

/// Starting fit for the iterative estimators.
enum class InitMethod { pca, kendall };

std::string_view init_method_name(InitMethod m);
InitMethod parse_init_method(std::string_view name);

/// Per-time weights w'_t of the weighted second moment, each in (0, 1/2].
struct WeightVector {
    Vector w;
};

struct FitDiagnostics {
    Method method = Method::pca;
    int iterations = 0;
    bool converged = true;
    /// Threshold of the last reweighting (HPCA) or the one used to evaluate
    /// the objective trace (IHR); 0 for PCA.
    double tau = 0.0;
    std::string tau_policy;
    /// HPCA: vector Huber objective after each pass. IHR: element-wise
    /// objective at the start and after each outer sweep.
    std::vector<double> objective_trace;
    /// IHR only: element-wise objective after every half-sweep, before renormalization.
    std::vector<double> half_sweep_trace;
};

struct FitResult {
    FactorFit fit;
    FitDiagnostics info;
};

/// Conventional principal components: L = sqrt(N) * leading eigenvectors of
/// the second moment, f_t = L'Y_t / N, then identification.
FactorFit fit_pca(const Panel& panel, Index r);

/// Spatial Kendall's tau matrix
/// 2/(T(T-1)) sum_{s<t} (Y_t - Y_s)(Y_t - Y_s)' / ||Y_t - Y_s||^2.
/// Pairs with identical observations are skipped.
Matrix spatial_kendall_moment(const Panel& panel);

/// Principal components of the spatial Kendall's tau matrix, factors by projection.
FactorFit fit_kendall(const Panel& panel, Index r);

/// Starting fit of the requested kind.
FactorFit initial_fit(const Panel& panel, Index r, InitMethod init);

/// Huber KKT weights of a loading matrix with L'L/N = I.
WeightVector hpca_weights(const Panel& panel, const FactorFit& fit, double tau);

/// Huber principal components: PCA on the Huber-weighted second moment.
FitResult fit_hpca(const Panel& panel, Index r, const HpcaConfig& cfg = {});

/// Iterative Huber regression: alternating per-series and per-time Huber
/// regressions, jointly renormalized after each sweep.
FitResult fit_ihr(const Panel& panel, Index r, const IhrConfig& cfg = {});

/// Dispatch on Method with default configurations.
FitResult fit_method(const Panel& panel, Index r, Method method, const HuberConfig& huber = {});

struct Objectives {
    double vector_huber;       ///< (1/T) sum_t H(||Y_t - L f_t||)
    double elementwise_huber;  ///< (1/(TN)) sum_{i,t} H(Y_it - l_i'f_t)
};

Objectives eval_objectives(const Panel& panel, const Matrix& loadings, const Matrix& factors, double tau);

}  // namespace huberfactor
