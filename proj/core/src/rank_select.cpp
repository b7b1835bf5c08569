#include "huberfactor/rank_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "huberfactor/errors.hpp"

namespace huberfactor {

std::string_view rank_method_name(RankMethod m) {
    switch (m) {
        case RankMethod::rm_hpca: return "rm_hpca";
        case RankMethod::rm_ihr: return "rm_ihr";
        case RankMethod::er: return "er";
    }
    return "unknown";
}

RankMethod parse_rank_method(std::string_view name) {
    if (name == "rm-hpca" || name == "rm_hpca") return RankMethod::rm_hpca;
    if (name == "rm-ihr" || name == "rm_ihr") return RankMethod::rm_ihr;
    if (name == "er") return RankMethod::er;
    throw ParameterError("unknown rank method '" + std::string(name) + "' (valid: rm-hpca, rm-ihr, er)");
}

double default_threshold(Index n, Index t) {
    const double l = static_cast<double>(std::min(n, t));
    return std::pow(l, -1.0 / 3.0);
}

Index default_rank_bound(Index n, Index t) {
    return std::max<Index>(1, std::min<Index>(8, std::min(n, t) / 2));
}

Index count_above_threshold(const Vector& sigma_diag, double threshold) {
    return static_cast<Index>((sigma_diag.array() > threshold).count());
}

RankEstimate estimate_rank_rm(const Panel& panel, Index k, Method method, std::optional<double> threshold,
                              const HuberConfig& huber, InitMethod init) {
    const Index limit = std::min(panel.n_series(), panel.n_times());
    if (k < 1 || k > limit) {
        throw DimensionError("estimate_rank_rm: k=" + std::to_string(k) + " outside [1, min(N,T)=" +
                             std::to_string(limit) + "]");
    }
    if (threshold && !(*threshold > 0.0)) {
        throw ParameterError("estimate_rank_rm: threshold P must be positive");
    }
    if (method == Method::pca) {
        throw ParameterError("estimate_rank_rm: method must be hpca or ihr");
    }
    const FactorFit start = initial_fit(panel, k, init);
    const NormalizedFactors seed{start.loadings, start.factors};
    FitResult result;
    if (method == Method::hpca) {
        HpcaConfig cfg;
        cfg.initial = seed;
        result = fit_hpca(panel, k, cfg);
    } else {
        IhrConfig cfg;
        cfg.huber = huber;
        cfg.initial = seed;
        result = fit_ihr(panel, k, cfg);
    }
    const double t = static_cast<double>(panel.n_times());

    RankEstimate out;
    out.method = method == Method::hpca ? RankMethod::rm_hpca : RankMethod::rm_ihr;
    out.threshold = threshold.value_or(default_threshold(panel.n_series(), panel.n_times()));
    out.sigma_diag = (result.fit.factors.transpose() * result.fit.factors / t).diagonal();
    out.r_hat = count_above_threshold(out.sigma_diag, out.threshold);
    return out;
}

Index eigenvalue_ratio_argmax(const Vector& eigenvalues, Index k_max) {
    if (k_max < 1 || k_max + 1 > eigenvalues.size()) {
        throw DimensionError("eigenvalue_ratio_argmax: need k_max + 1 <= " + std::to_string(eigenvalues.size()) +
                             " eigenvalues, got k_max=" + std::to_string(k_max));
    }
    Index best = 1;
    double best_ratio = -std::numeric_limits<double>::infinity();
    for (Index j = 1; j <= k_max; ++j) {
        const double denom = eigenvalues(j);
        const double ratio = denom <= 0.0 ? std::numeric_limits<double>::infinity() : eigenvalues(j - 1) / denom;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = j;
            if (std::isinf(ratio)) break;
        }
    }
    return best;
}

RankEstimate estimate_rank_er(const Panel& panel, Index k_max) {
    const Index limit = std::min(panel.n_series(), panel.n_times());
    if (k_max < 1 || k_max + 1 > limit) {
        throw DimensionError("estimate_rank_er: k_max + 1 = " + std::to_string(k_max + 1) + " exceeds min(N,T)=" +
                             std::to_string(limit));
    }
    const EigenPair eig = top_eigen(second_moment(panel), k_max + 1);
    RankEstimate out;
    out.method = RankMethod::er;
    out.sigma_diag = eig.values;
    out.r_hat = eigenvalue_ratio_argmax(eig.values, k_max);
    return out;
}

}  // namespace huberfactor
