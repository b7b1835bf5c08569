#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "huberfactor/errors.hpp"
#include "huberfactor/portfolio.hpp"
#include "huberfactor/synth.hpp"
#include "oracles.hpp"

using namespace huberfactor;

TEST_CASE("hard_threshold examples") {
    Matrix s(2, 2);
    s << 2, 0.1, 0.1, 3;
    Matrix expect(2, 2);
    expect << 2, 0, 0, 3;
    CHECK(hard_threshold(s, 0.5) == expect);
    CHECK(hard_threshold(s, 0.0) == s);
    Matrix small(2, 2);
    small << 0.01, 0, 0, 0.02;
    CHECK(hard_threshold(small, 0.5) == small);
}

TEST_CASE("factor_covariance construction") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> g;
    const Index n = 6, w = 40;
    Matrix l(n, 2), f(w, 2);
    for (Index i = 0; i < n; ++i) l.row(i) << g(rng), g(rng);
    for (Index t = 0; t < w; ++t) f.row(t) << g(rng), 0.5 * g(rng);
    const NormalizedFactors nf = normalize_fit(l, f);

    SUBCASE("zero residuals") {
        const FactorFit fit = make_fit(Panel(nf.loadings * nf.factors.transpose()), nf);
        const Matrix c = nf.factors * nf.loadings.transpose();
        const Matrix sigma = factor_covariance(fit, w, 0.5);
        const Matrix low_rank = c.transpose() * c / static_cast<double>(w);
        // Rank 2 < N, so the eigenvalue floor 1e-8 * trace / N is lifted in.
        const double floor = 1e-8 * low_rank.trace() / static_cast<double>(n);
        CHECK((sigma - low_rank).cwiseAbs().maxCoeff() <= floor + 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
        CHECK(es.eigenvalues().minCoeff() >= floor * (1.0 - 1e-6));
    }

    Matrix e(n, w);
    for (Index t = 0; t < w; ++t)
        for (Index i = 0; i < n; ++i) e(i, t) = g(rng);
    const Matrix y = nf.loadings * nf.factors.transpose() + e;
    const FactorFit fit = make_fit(Panel(y), nf);
    const Matrix low = nf.loadings * (nf.factors.transpose() * nf.factors / static_cast<double>(w)) *
                       nf.loadings.transpose();
    const Matrix ee = e * e.transpose() / static_cast<double>(w);

    SUBCASE("C = 0 keeps the residual covariance") {
        CHECK((factor_covariance(fit, w, 0.0) - (low + ee)).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("large threshold keeps only the residual diagonal") {
        const Matrix diag_only = ee.diagonal().asDiagonal();
        CHECK((factor_covariance(fit, w, 100.0) - (low + diag_only)).cwiseAbs().maxCoeff() <= 1e-10);
    }
    CHECK_THROWS_AS(factor_covariance(fit, w + 1, 0.5), DimensionError);
}

TEST_CASE("min_variance_weights examples") {
    CHECK(min_variance_weights(Matrix::Identity(2, 2)).isApprox(Vector::Constant(2, 0.5)));
    Matrix d = Matrix::Zero(2, 2);
    d.diagonal() << 1, 2;
    Vector expect(2);
    expect << 2.0 / 3.0, 1.0 / 3.0;
    CHECK(min_variance_weights(d).isApprox(expect));
    Matrix singular(2, 2);
    singular << 1, 1, 1, 1;
    CHECK_THROWS_AS(min_variance_weights(singular), DefinitenessError);
}

TEST_CASE("min_variance_weights dominate random feasible portfolios") {
    std::mt19937_64 rng(62);
    for (int k = 0; k < 20; ++k) {
        const Matrix sigma = oracles::random_pd_matrix(3 + k, rng);
        CHECK(oracles::min_variance_dominates(sigma, min_variance_weights(sigma), 500, rng));
    }
}

TEST_CASE("performance_stats examples") {
    const PerformanceStats two = performance_stats(std::vector<double>{0.0, 2.0});
    CHECK(two.mean == doctest::Approx(1.0));
    CHECK(two.sd == doctest::Approx(std::sqrt(2.0)));
    REQUIRE(two.sharpe.has_value());
    CHECK(*two.sharpe == doctest::Approx(1.0 / std::sqrt(2.0)));

    const PerformanceStats ten = performance_stats(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK(ten.quantiles.at(0.5) == doctest::Approx(5.5));
    CHECK(ten.quantiles.size() == 5);

    const PerformanceStats flat = performance_stats(std::vector<double>{3, 3, 3});
    CHECK(flat.sd == 0.0);
    CHECK_FALSE(flat.sharpe.has_value());
}

TEST_CASE("rolling backtest bookkeeping") {
    ReturnSimConfig sim;
    sim.n = 20;
    sim.t = 31;
    sim.seed = 63;
    const GroundTruth g = gen_factor_returns(sim);
    BacktestConfig cfg;
    cfg.window = 30;
    cfg.method = Method::pca;
    const BacktestReport one = rolling_backtest(g.panel, cfg);
    REQUIRE(one.oos_returns.size() == 1);
    for (const auto& [level, value] : one.stats.quantiles) CHECK(value == doctest::Approx(one.oos_returns(0)));
    CHECK(one.times.front() == g.panel.time_ids().back());

    sim.t = 60;
    const GroundTruth longer = gen_factor_returns(sim);
    cfg.method = Method::ihr;
    cfg.keep_weights = true;
    const BacktestReport a = rolling_backtest(longer.panel, cfg);
    cfg.threads = 3;
    const BacktestReport b = rolling_backtest(longer.panel, cfg);
    CHECK(a.oos_returns.size() == 30);
    CHECK(a.oos_returns == b.oos_returns);
    CHECK(a.weights == b.weights);
    CHECK(a.weights.rows() == 30);
    for (Index k = 0; k < a.weights.rows(); ++k) CHECK(a.weights.row(k).sum() == doctest::Approx(1.0));

    cfg.window = 60;
    CHECK_THROWS_AS(rolling_backtest(longer.panel, cfg), DimensionError);
    cfg.window = 2;
    CHECK_THROWS_AS(rolling_backtest(longer.panel, cfg), ParameterError);
}

TEST_CASE("equal weight returns average the cross section") {
    Matrix y(2, 4);
    y << 1, 2, 3, 4, 3, 4, 5, 6;
    const Vector ew = equal_weight_returns(Panel(y), 2);
    REQUIRE(ew.size() == 2);
    CHECK(ew(0) == doctest::Approx(4.0));
    CHECK(ew(1) == doctest::Approx(5.0));
}
