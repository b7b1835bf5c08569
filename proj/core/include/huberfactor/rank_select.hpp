#pragma once

#include <optional>
#include <string_view>

#include "huberfactor/estimators.hpp"

namespace huberfactor {

enum class RankMethod { rm_hpca, rm_ihr, er };

std::string_view rank_method_name(RankMethod m);
/// Accepts "rm-hpca"/"rm_hpca", "rm-ihr"/"rm_ihr" and "er".
RankMethod parse_rank_method(std::string_view name);

struct RankEstimate {
    Index r_hat = 0;
    /// Rank minimization: diagonal of F'F/T at rank k. ER: eigenvalues
    /// lambda_1..lambda_{k_max+1} of the second moment.
    Vector sigma_diag;
    double threshold = 0.0;  ///< P for rm_*; 0 for ER
    RankMethod method = RankMethod::rm_hpca;
};

/// min(N, T)^(-1/3).
double default_threshold(Index n, Index t);

/// min(8, floor(min(N,T)/2)), at least 1.
Index default_rank_bound(Index n, Index t);

/// Number of entries strictly above the threshold.
Index count_above_threshold(const Vector& sigma_diag, double threshold);

/// Rank minimization: fit at rank k and count diagonal factor moments above P.
/// The robust fit starts from `init` (PCA by default).
RankEstimate estimate_rank_rm(const Panel& panel, Index k, Method method, std::optional<double> threshold = {},
                              const HuberConfig& huber = {}, InitMethod init = InitMethod::pca);

/// argmax_{1<=j<=k_max} lambda_j / lambda_{j+1}; a zero denominator counts as +inf
/// and the smallest such j wins.
Index eigenvalue_ratio_argmax(const Vector& eigenvalues, Index k_max);

/// Eigenvalue-ratio selector on the unweighted second moment.
RankEstimate estimate_rank_er(const Panel& panel, Index k_max);

}  // namespace huberfactor
