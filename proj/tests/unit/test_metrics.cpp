#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "huberfactor/errors.hpp"
#include "huberfactor/io.hpp"
#include "huberfactor/metrics.hpp"
#include "huberfactor/stats.hpp"

using namespace huberfactor;

TEST_CASE("summary statistics") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(mean(x) == doctest::Approx(5.5));
    CHECK(median(x) == doctest::Approx(5.5));
    CHECK(quantile_linear(x, 0.5) == doctest::Approx(5.5));
    CHECK(quantile_linear(x, 0.1) == doctest::Approx(1.9));
    CHECK(quantile_linear(x, 0.0) == 1.0);
    CHECK(quantile_linear(x, 1.0) == 10.0);
    CHECK(iqr(x) == doctest::Approx(4.5));
    CHECK(sample_sd(std::vector<double>{0, 2}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sample_sd(std::vector<double>{3}) == 0.0);
    CHECK_THROWS_AS(mean(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(quantile_linear(x, 1.5), ParameterError);
}

TEST_CASE("parallel_for covers every index once") {
    std::vector<int> hits(57, 0);
    parallel_for(57, 4, [&](int k) { hits[static_cast<std::size_t>(k)] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK(default_thread_count() >= 1);
    CHECK_THROWS(parallel_for(3, 2, [](int k) {
        if (k == 1) throw DegeneracyError("boom");
    }));
}

TEST_CASE("subspace distance examples") {
    const Matrix o = orthonormal_basis(Matrix::Random(5, 2));
    CHECK(subspace_distance(o, o) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(subspace_distance(Matrix(Vector::Unit(2, 0)), Matrix(Vector::Unit(2, 1))) == doctest::Approx(1.0));
    Matrix e12 = Matrix::Zero(3, 2);
    e12(0, 0) = 1.0;
    e12(1, 1) = 1.0;
    CHECK(subspace_distance(Matrix(Vector::Unit(3, 0)), e12) == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(subspace_distance(2.0 * e12, e12), ValidationError);
    CHECK_THROWS_AS(subspace_distance(Matrix(Vector::Unit(2, 0)), e12), DimensionError);
}

TEST_CASE("replication errors") {
    const GroundTruth truth = gen_scenario(scenario_config('A', 1, 30, 40, 51));
    const NormalizedFactors nf = normalize_fit(truth.loadings, truth.factors);
    FactorFit fit = make_fit(truth.panel, nf);
    ReplicationErrors e = replication_errors(fit, truth);
    CHECK(e.cc_err <= 1e-10);
    CHECK(e.fl_dist <= 1e-7);
    CHECK(e.fs_dist <= 1e-7);

    FactorFit flipped = fit;
    flipped.loadings = -flipped.loadings;
    CHECK(replication_errors(flipped, truth).fl_dist <= 1e-7);

    FactorFit doubled = fit;
    doubled.loadings *= 2.0;
    CHECK(replication_errors(doubled, truth).cc_err == doctest::Approx(1.0));
}

TEST_CASE("monte carlo aggregation and determinism") {
    const SimConfig cfg = scenario_config('A', 2, 30, 30, 0);
    McOptions opt;
    opt.rank_k = 5;
    opt.er_kmax = 5;
    const McReport a = run_monte_carlo(cfg, {"pca", "ihr", "rm-hpca", "er"}, 3, 77, opt);
    opt.threads = 3;
    const McReport b = run_monte_carlo(cfg, {"pca", "ihr", "rm-hpca", "er"}, 3, 77, opt);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(a.method("pca").replicates.size() == 3);
    CHECK(a.method("er").rhat.size() == 3);
    CHECK(a.method("pca").mee_cc > 0.0);

    const std::uint64_t s = replication_seed(77, 0);
    const McReport twin = run_monte_carlo_with_seeds(cfg, {"pca", "hpca"}, {s, s}, {});
    CHECK(twin.method("pca").mee_cc_iqr == 0.0);
    CHECK(twin.method("hpca").ave_fl_sd == 0.0);

    const McReport one = run_monte_carlo(cfg, {"pca"}, 1, 77, {});
    CHECK(one.method("pca").mee_cc_iqr == 0.0);
    CHECK(one.method("pca").ave_fl_sd == 0.0);

    CHECK_THROWS_AS(run_monte_carlo(cfg, {"pca", "svd"}, 2, 1, {}), ParameterError);
    CHECK_THROWS_AS(run_monte_carlo(cfg, {"pca"}, 0, 1, {}), ParameterError);
    CHECK_THROWS_AS(a.method("hpca"), ParameterError);
}

TEST_CASE("failed replications are logged and excluded") {
    // r = N leaves no room for the over-specified rank of rm-ihr.
    const SimConfig cfg = scenario_config('A', 1, 6, 30, 0);
    McOptions opt;
    opt.rank_k = 7;
    const McReport rep = run_monte_carlo(cfg, {"pca", "rm-ihr"}, 2, 5, opt);
    CHECK(rep.method("rm-ihr").failures == 2);
    CHECK(rep.method("rm-ihr").failure_log.size() == 2);
    CHECK(rep.method("rm-ihr").rhat.empty());
    CHECK(rep.method("pca").failures == 0);
}

TEST_CASE("normal QQ correlation") {
    std::mt19937_64 rng(52);
    std::normal_distribution<double> g(3.0, 2.0);
    std::vector<double> q(500);
    for (auto& v : q) v = g(rng);
    CHECK(normal_qq_correlation(q) > 0.99);
    std::vector<double> skewed;
    for (int k = 1; k <= 200; ++k) skewed.push_back(std::exp(k / 20.0));
    CHECK(normal_qq_correlation(skewed) < 0.9);
    CHECK_THROWS_AS(normal_qq_correlation(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("normality probe guards and small run") {
    const SimConfig gauss = scenario_config('A', 1, 30, 30, 0);
    CHECK_THROWS_AS(normality_probe(gauss, 0, 1, 1, {}, 1), ValidationError);
    CHECK_THROWS_AS(normality_probe(scenario_config('A', 4, 30, 30, 0), 0, 10, 1, {}, 1), ParameterError);
    CHECK_THROWS_AS(normality_probe(gauss, 30, 10, 1, {}, 1), DimensionError);
    const NormalityProbe p = normality_probe(gauss, 0, 20, 1, {}, 2);
    CHECK(p.samples.rows() == 20);
    CHECK(p.mean_z.size() == 3);
    CHECK(p.qq_corr <= 1.0);
}

TEST_CASE("normality probe draws vanish without noise under both alignments") {
    SimConfig clean = scenario_config('A', 1, 30, 30, 0);
    clean.theta = 0.0;
    for (ProbeAlignment a : {ProbeAlignment::sign, ProbeAlignment::rotation}) {
        const NormalityProbe p = normality_probe(clean, 4, 3, 7, {}, 1, a);
        CHECK(p.samples.cwiseAbs().maxCoeff() <= 1e-6);
    }
}
