#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "huberfactor/panel.hpp"

namespace huberfactor {

using Rng = std::mt19937_64;

/// Law of the stacked vector (f_t', v_t') of factors and error innovations.
struct InnovationLaw {
    enum class Kind {
        gaussian,                      ///< i.i.d. N(0, 1) coordinates
        mvt,                           ///< joint elliptical t_nu over (f_t, v_t)
        gaussian_factors_mvt_errors,   ///< f_t Gaussian, v_t joint t_nu
        alpha_stable,                  ///< i.i.d. symmetric S_alpha(0, 1, 0) coordinates
        skew_t_factors_stable_errors,  ///< f_t skew-t(nu, skew), v_t i.i.d. S_alpha
    };

    Kind kind = Kind::gaussian;
    double nu = 3.0;
    double alpha = 1.9;
    double skew = 20.0;

    static InnovationLaw gaussian() { return {}; }
    static InnovationLaw mvt(double nu) { return {Kind::mvt, nu}; }
    static InnovationLaw gaussian_factors_mvt_errors(double nu) { return {Kind::gaussian_factors_mvt_errors, nu}; }
    static InnovationLaw alpha_stable(double alpha) { return {Kind::alpha_stable, 3.0, alpha}; }
    static InnovationLaw skew_t_factors_stable_errors(double alpha, double skew, double nu) {
        return {Kind::skew_t_factors_stable_errors, nu, alpha, skew};
    }

    std::string name() const;
    /// False when some coordinate has infinite variance.
    bool finite_variance() const;
};

/// Data-generating parameters for one synthetic panel.
struct SimConfig {
    Index n = 100;
    Index t = 100;
    Index r = 3;
    double theta = 1.0;  ///< noise scale: Y = L F' + sqrt(theta) U
    double rho = 0.0;    ///< AR(1) coefficient of the errors
    double beta = 0.0;   ///< cross-sectional spillover
    Index j = 0;         ///< spillover half-width
    InnovationLaw dist;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GroundTruth {
    Matrix loadings;  ///< N x r
    Matrix factors;   ///< T x r
    Panel panel;
};

/// Parameter block of a named scenario: A/B cases 1-5, C/D cases 1-3.
/// B and D use rho = 0.5, beta = 0.2, J = max(10, floor(N/20)) capped at N.
SimConfig scenario_config(char scenario, int case_id, Index n, Index t, std::uint64_t seed);

/// SplitMix64 mix of (master, stream, index); used to give every purpose its
/// own reproducible engine.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// One stable draw by the Chambers-Mallows-Stuck transform.
double gen_alpha_stable(double alpha, double skew, double scale, double loc, Rng& rng);

/// Multivariate t_nu(0, I): a Gaussian vector over one shared sqrt(chi2_nu / nu).
Vector gen_mvt(double nu, Index dim, Rng& rng);

/// Skew-t draw by hidden truncation with delta = a / sqrt(1 + a^2).
double gen_skew_t(double nu, double alpha_skew, Rng& rng);

/// Generates loadings, factors and the panel for a configuration.
/// Deterministic in cfg; uses a 50-step AR burn-in from e = 0.
GroundTruth gen_scenario(const SimConfig& cfg);

/// Factor-structured return panel for portfolio experiments: a market factor
/// with loadings near 1, further factors with zero-mean loadings, t_nu factor
/// and idiosyncratic shocks with heterogeneous scales.
struct ReturnSimConfig {
    Index n = 100;
    Index t = 200;
    Index r = 2;
    double nu = 4.0;
    std::uint64_t seed = 0;
};

GroundTruth gen_factor_returns(const ReturnSimConfig& cfg);

}  // namespace huberfactor
