#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "huberfactor/estimators.hpp"
#include "huberfactor/rank_select.hpp"
#include "huberfactor/synth.hpp"

namespace huberfactor {

/// sqrt(1 - tr(O1 O1' O2 O2') / max(q1, q2)) for column-orthonormal O1, O2.
/// Throws ValidationError when either argument is not orthonormal to 1e-8.
double subspace_distance(const Matrix& o1, const Matrix& o2);

/// Thin-QR orthonormal basis of the column space of `a`.
Matrix orthonormal_basis(const Matrix& a);

struct ReplicationErrors {
    double cc_err = 0.0;   ///< ||L^F^' - LF'||_F^2 / ||LF'||_F^2
    double fl_dist = 0.0;  ///< subspace distance between loading spaces
    double fs_dist = 0.0;  ///< subspace distance between factor spaces
};

ReplicationErrors replication_errors(const FactorFit& fit, const GroundTruth& truth);

/// Estimator names accepted by the Monte Carlo harness: the factor fits
/// "pca", "hpca", "ihr" and the rank selectors "rm-hpca", "rm-ihr", "er".
bool is_fit_method(const std::string& name);
bool is_rank_method(const std::string& name);
const std::vector<std::string>& known_mc_methods();

struct McOptions {
    Index rank_k = 8;                 ///< over-specified rank for rm-* methods
    std::optional<double> threshold;  ///< P for rm-*; default min(N,T)^(-1/3)
    Index er_kmax = 8;
    HuberConfig huber;                ///< IHR regressions
    InitMethod rank_init = InitMethod::pca;  ///< starting fit for rm-*
    int threads = 1;
};

struct ReplicationFailure {
    std::uint64_t seed = 0;
    std::string message;
};

struct MethodReport {
    std::string method;
    bool rank_study = false;
    // Fit studies.
    double mee_cc = 0.0;
    double mee_cc_iqr = 0.0;
    double ave_fl = 0.0;
    double ave_fl_sd = 0.0;
    double ave_fs = 0.0;
    double ave_fs_sd = 0.0;
    std::vector<ReplicationErrors> replicates;
    // Rank studies.
    double mean_rhat = 0.0;
    int under_count = 0;
    int over_count = 0;
    std::vector<Index> rhat;
    // Shared.
    int failures = 0;
    std::vector<ReplicationFailure> failure_log;
};

struct McReport {
    SimConfig scenario;  ///< template; per-replication seeds override its seed
    int replications = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<MethodReport> methods;

    const MethodReport& method(const std::string& name) const;
};

/// Seed of replication m under a master seed.
std::uint64_t replication_seed(std::uint64_t master_seed, int m);

/// Runs every method on M generated panels and aggregates the errors:
/// median/IQR of cc_err, mean/sd of the two subspace distances, or mean r_hat
/// with under/over counts for rank methods. Failed replications are logged
/// and left out of the aggregates. Output depends only on the seeds.
McReport run_monte_carlo(const SimConfig& scenario, const std::vector<std::string>& methods, int replications,
                         std::uint64_t master_seed, const McOptions& options = {});

/// Same, with the replication seeds given explicitly.
McReport run_monte_carlo_with_seeds(const SimConfig& scenario, const std::vector<std::string>& methods,
                                    const std::vector<std::uint64_t>& seeds, const McOptions& options = {});

struct NormalityProbe {
    Vector mean_z;    ///< per component: sample mean / sample sd of the z draws
    double qq_corr;   ///< smallest normal QQ correlation over components
    Matrix samples;   ///< M x r draws of sqrt(T) (l^_i - A' l_0i)
};

/// How the identified true loadings are matched to the estimate.
enum class ProbeAlignment {
    sign,      ///< A = sign matrix from the factor cross moment
    rotation,  ///< A = (L0'L0)^{-1} L0' L^, least-squares rotation onto the estimate
};

/// Monte Carlo look at the sampling distribution of one IHR loading row.
///
/// The true model is put in identified form by normalize_fit before the
/// alignment. Refuses scenarios with infinite-variance innovations and fewer
/// than two replications.
NormalityProbe normality_probe(const SimConfig& scenario, Index series, int replications,
                               std::uint64_t master_seed, const IhrConfig& ihr = {}, int threads = 1,
                               ProbeAlignment alignment = ProbeAlignment::sign);

/// Pearson correlation of sorted standardized data with normal quantiles at
/// Blom plotting positions (k - 3/8) / (n + 1/4).
double normal_qq_correlation(std::span<const double> x);

}  // namespace huberfactor
