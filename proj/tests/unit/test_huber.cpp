#include <doctest.h>

#include <cmath>
#include <random>

#include "huberfactor/errors.hpp"
#include "huberfactor/huber.hpp"
#include "oracles.hpp"

using namespace huberfactor;

TEST_CASE("huber scalar functions") {
    CHECK(huber_loss(0.0, 1.0) == 0.0);
    CHECK(huber_loss(0.5, 1.0) == doctest::Approx(0.125));
    CHECK(huber_loss(2.0, 1.0) == doctest::Approx(1.5));
    CHECK(huber_loss(-2.0, 1.0) == doctest::Approx(1.5));
    CHECK(huber_psi(0.5, 1.0) == doctest::Approx(0.5));
    CHECK(huber_psi(2.0, 1.0) == doctest::Approx(1.0));
    CHECK(huber_psi(-3.0, 1.0) == doctest::Approx(-1.0));
    CHECK(huber_weight(0.0, 1.0) == 1.0);
    CHECK(huber_weight(0.9, 1.0) == 1.0);
    CHECK(huber_weight(4.0, 1.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(huber_loss(1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(huber_psi(1.0, -1.0), ParameterError);
    CHECK_THROWS_AS(huber_weight(1.0, 0.0), ParameterError);
}

TEST_CASE("huber loss is continuous with continuous derivative at tau") {
    const double tau = 1.7, h = 1e-7;
    CHECK(huber_loss(tau - h, tau) == doctest::Approx(huber_loss(tau + h, tau)).epsilon(1e-6));
    CHECK(huber_psi(tau - h, tau) == doctest::Approx(huber_psi(tau + h, tau)).epsilon(1e-6));
}

TEST_CASE("huber_regress one-dimensional examples") {
    Vector y(3);
    y << 0, 0, 3;
    const Matrix ones = Matrix::Ones(3, 1);
    HuberConfig cfg;
    cfg.tau = TauPolicy::fixed(1.0);
    const auto res = huber_regress(y, ones, cfg);
    CHECK(res.coef(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.converged);

    // Grid search over the convex objective.
    double best_b = 0.0, best = 1e300;
    for (int k = 0; k <= 300000; ++k) {
        const double b = -1.0 + 4.0 * k / 300000.0;
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += oracles::huber(y(i) - b, 1.0);
        if (s < best) best = s, best_b = b;
    }
    CHECK(std::abs(res.coef(0) - best_b) <= 2e-5);

    cfg.tau = TauPolicy::fixed(1e6);
    CHECK(huber_regress(y, ones, cfg).coef(0) == doctest::Approx(1.0));

    const Vector c = Vector::Constant(3, 2.75);
    CHECK(huber_regress(c, ones, cfg).coef(0) == doctest::Approx(2.75));
    cfg.tau = TauPolicy::mad_scaled();
    CHECK(huber_regress(c, ones, cfg).coef(0) == doctest::Approx(2.75));
}

TEST_CASE("huber_regress agrees with projected gradient and descends") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::cauchy_distribution<double> cauchy;
    for (int p = 0; p < 10; ++p) {
        Matrix x(40, 3);
        for (Index j = 0; j < 3; ++j)
            for (Index i = 0; i < 40; ++i) x(i, j) = g(rng);
        Vector y = x * Vector::Constant(3, 1.0);
        for (Index i = 0; i < 40; ++i) y(i) += cauchy(rng);
        HuberConfig cfg;
        cfg.tau = TauPolicy::fixed(1.0);
        const auto res = huber_regress(y, x, cfg);
        const Vector oracle = oracles::projected_gradient_huber(y, x, 1.0);
        CHECK((res.coef - oracle).cwiseAbs().maxCoeff() <= 1e-6);
        for (std::size_t k = 1; k < res.objective_trace.size(); ++k) {
            CHECK(res.objective_trace[k] <= res.objective_trace[k - 1] * (1.0 + 1e-12));
        }
        CHECK(res.objective_trace.back() == doctest::Approx(oracles::huber_sum(y, x, res.coef, 1.0)));
    }
}

TEST_CASE("huber_regress warm start reaches the same minimizer") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    Matrix x(30, 2);
    for (Index j = 0; j < 2; ++j)
        for (Index i = 0; i < 30; ++i) x(i, j) = g(rng);
    Vector y(30);
    for (Index i = 0; i < 30; ++i) y(i) = g(rng) + (i % 7 == 0 ? 25.0 : 0.0);
    HuberConfig cfg;
    cfg.tau = TauPolicy::fixed(0.8);
    const auto cold = huber_regress(y, x, cfg);
    const auto warm = huber_regress(y, x, cfg, Vector::Constant(2, 5.0));
    CHECK((cold.coef - warm.coef).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("huber_regress guards") {
    HuberConfig cfg;
    CHECK_THROWS_AS(huber_regress(Vector::Ones(3), Matrix::Ones(4, 1), cfg), DimensionError);
    Matrix collinear(5, 2);
    collinear.col(0) = Vector::LinSpaced(5, 0, 1);
    collinear.col(1) = 2.0 * collinear.col(0);
    CHECK_THROWS_AS(huber_regress(Vector::LinSpaced(5, 1, 2), collinear, cfg), DegeneracyError);
    HuberConfig bad;
    bad.irls_max_iter = 0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = HuberConfig{};
    bad.tau = TauPolicy::fixed(-1.0);
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("mad_tau scales the median absolute deviation") {
    Vector r(5);
    r << -2, -1, 0, 1, 2;
    // median 0, MAD 1
    CHECK(mad_tau(r, 1.345, 1.0) == doctest::Approx(1.345 * 1.4826));
    CHECK(mad_tau(Vector::Zero(4), 1.345, 2.0) > 0.0);
}
