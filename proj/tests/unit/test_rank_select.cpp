#include <doctest.h>

#include <cmath>

#include "huberfactor/errors.hpp"
#include "huberfactor/rank_select.hpp"
#include "huberfactor/synth.hpp"

using namespace huberfactor;

TEST_CASE("default_threshold examples") {
    CHECK(default_threshold(100, 100) == doctest::Approx(0.2154).epsilon(1e-3));
    CHECK(default_threshold(8, 27) == doctest::Approx(0.5));
    CHECK(default_threshold(1, 1) == doctest::Approx(1.0));
    CHECK(default_rank_bound(100, 100) == 8);
    CHECK(default_rank_bound(6, 100) == 3);
}

TEST_CASE("counting rule") {
    Vector d(4);
    d << 3.2, 1.1, 0.8, 0.001;
    CHECK(count_above_threshold(d, 0.1) == 3);
    CHECK(count_above_threshold(d, 5.0) == 0);
}

TEST_CASE("eigenvalue ratio examples") {
    Vector ev(5);
    ev << 8, 4, 2, 0.01, 0.009;
    CHECK(eigenvalue_ratio_argmax(ev, 4) == 3);
    Vector dominant(5);
    dominant << 5, 0.001, 0.0009, 0.0008, 0.0007;
    CHECK(eigenvalue_ratio_argmax(dominant, 4) == 1);
    Vector zero_tail(4);
    zero_tail << 4, 2, 0, 0;
    CHECK(eigenvalue_ratio_argmax(zero_tail, 3) == 2);
    CHECK_THROWS_AS(eigenvalue_ratio_argmax(ev, 5), DimensionError);
}

TEST_CASE("noiseless rank recovery") {
    SimConfig cfg = scenario_config('C', 1, 60, 60, 31);
    cfg.theta = 0.0;
    const GroundTruth truth = gen_scenario(cfg);
    const RankEstimate hp = estimate_rank_rm(truth.panel, 8, Method::hpca);
    CHECK(hp.r_hat == 3);
    CHECK(hp.sigma_diag.size() == 8);
    CHECK(hp.threshold == doctest::Approx(default_threshold(60, 60)));
    CHECK(estimate_rank_rm(truth.panel, 8, Method::hpca, {}, {}, InitMethod::kendall).r_hat == 3);
    // Spare IHR factors are pure rounding noise, so the loading regressions are degenerate.
    CHECK_THROWS_AS(estimate_rank_rm(truth.panel, 8, Method::ihr), DegeneracyError);
    CHECK(estimate_rank_rm(truth.panel, 3, Method::ihr).r_hat == 3);
    CHECK(estimate_rank_er(truth.panel, 8).r_hat == 3);
}

TEST_CASE("noisy rank recovery") {
    const GroundTruth truth = gen_scenario(scenario_config('C', 1, 100, 100, 32));
    CHECK(estimate_rank_rm(truth.panel, 8, Method::hpca).r_hat == 3);
    CHECK(estimate_rank_rm(truth.panel, 8, Method::ihr).r_hat == 3);
    CHECK(estimate_rank_er(truth.panel, 8).r_hat == 3);
}

TEST_CASE("rank guards") {
    const GroundTruth truth = gen_scenario(scenario_config('C', 1, 20, 20, 33));
    CHECK_THROWS_AS(estimate_rank_rm(truth.panel, 9999, Method::hpca), DimensionError);
    CHECK_THROWS_AS(estimate_rank_rm(truth.panel, 4, Method::hpca, -1.0), ParameterError);
    CHECK_THROWS_AS(estimate_rank_rm(truth.panel, 4, Method::pca), ParameterError);
    CHECK_THROWS_AS(estimate_rank_er(truth.panel, 20), DimensionError);
    CHECK(parse_rank_method("rm-hpca") == RankMethod::rm_hpca);
    CHECK(parse_rank_method("rm_ihr") == RankMethod::rm_ihr);
    CHECK_THROWS_AS(parse_rank_method("bic"), ParameterError);
}
