#include "huberfactor/huber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "huberfactor/errors.hpp"

namespace huberfactor {

namespace {

constexpr double kMadConsistency = 1.4826;
constexpr double kMaxCondition = 1e12;

void require_tau(double tau, const char* who) {
    if (!(tau > 0.0)) {
        throw ParameterError(std::string(who) + ": tau must be positive, got " + std::to_string(tau));
    }
}

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// Weighted least squares via column-pivoted QR of diag(sqrt(w)) X.
Vector weighted_solve(const Matrix& x, const Vector& y, const Vector& sqrt_w) {
    const Matrix xw = sqrt_w.asDiagonal() * x;
    const Vector yw = sqrt_w.cwiseProduct(y);
    Eigen::ColPivHouseholderQR<Matrix> qr(xw);
    const Index r = x.cols();
    const double top = std::abs(qr.matrixQR()(0, 0));
    const double bottom = std::abs(qr.matrixQR()(r - 1, r - 1));
    if (!(bottom > 0.0) || top / bottom > kMaxCondition) {
        throw DegeneracyError("huber_regress: design is rank deficient or ill-conditioned (condition estimate " +
                              (bottom > 0.0 ? std::to_string(top / bottom) : std::string("inf")) + ")");
    }
    return qr.solve(yw);
}

double rms(const Eigen::Ref<const Vector>& v) {
    return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

}  // namespace

void HuberConfig::validate() const {
    if (!(tau.value > 0.0)) {
        throw ParameterError(tau.kind == TauPolicy::Kind::fixed ? "HuberConfig: fixed tau must be positive"
                                                                : "HuberConfig: MAD multiplier c must be positive");
    }
    if (!(irls_tol > 0.0)) throw ParameterError("HuberConfig: irls_tol must be positive");
    if (irls_max_iter < 1) throw ParameterError("HuberConfig: irls_max_iter must be >= 1");
}

double huber_loss(double x, double tau) {
    require_tau(tau, "huber_loss");
    const double a = std::abs(x);
    return a <= tau ? 0.5 * x * x : tau * a - 0.5 * tau * tau;
}

double huber_psi(double x, double tau) {
    require_tau(tau, "huber_psi");
    if (std::abs(x) <= tau) return x;
    return x > 0.0 ? tau : -tau;
}

double huber_weight(double x, double tau) {
    require_tau(tau, "huber_weight");
    const double a = std::abs(x);
    return a <= tau ? 1.0 : tau / a;
}

double huber_objective(const Vector& residuals, double tau) {
    require_tau(tau, "huber_objective");
    double total = 0.0;
    for (Index i = 0; i < residuals.size(); ++i) {
        const double a = std::abs(residuals(i));
        total += a <= tau ? 0.5 * a * a : tau * a - 0.5 * tau * tau;
    }
    return total;
}

double mad_tau(const Vector& residuals, double c, double scale) {
    std::vector<double> buf(residuals.data(), residuals.data() + residuals.size());
    const double med = median_inplace(buf);
    for (Index i = 0; i < residuals.size(); ++i) buf[static_cast<std::size_t>(i)] = std::abs(residuals(i) - med);
    const double mad = median_inplace(buf);
    return std::max(c * kMadConsistency * mad, 1e-8 * scale);
}

HuberRegressionResult huber_regress(const Vector& y, const Matrix& x, const HuberConfig& cfg,
                                    const std::optional<Vector>& init) {
    cfg.validate();
    const Index n = y.size();
    const Index r = x.cols();
    if (x.rows() != n) {
        throw DimensionError("huber_regress: y has " + std::to_string(n) + " rows, X has " + std::to_string(x.rows()));
    }
    if (r < 1 || n < r) {
        throw DimensionError("huber_regress: need n >= r >= 1, got n=" + std::to_string(n) + ", r=" + std::to_string(r));
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw ValidationError("huber_regress: non-finite input");
    }
    if (init && init->size() != r) {
        throw DimensionError("huber_regress: initial coefficient has length " + std::to_string(init->size()) +
                             ", expected " + std::to_string(r));
    }

    const double y_scale = rms(y) > 0.0 ? rms(y) : 1.0;
    const double x_scale = rms(x.reshaped()) > 0.0 ? rms(x.reshaped()) : 1.0;
    const double coef_floor = 1e-12 * y_scale / x_scale;
    const bool fixed = cfg.tau.kind == TauPolicy::Kind::fixed;

    auto tau_for = [&](const Vector& resid) {
        return fixed ? cfg.tau.value : mad_tau(resid, cfg.tau.value, y_scale);
    };

    HuberRegressionResult out;
    Vector coef = init ? *init : weighted_solve(x, y, Vector::Ones(n));
    Vector resid = y - x * coef;
    double tau = tau_for(resid);
    out.objective_trace.push_back(huber_objective(resid, tau));

    Vector best = coef;
    double best_obj = out.objective_trace.back();
    Vector sqrt_w(n);

    for (int iter = 1; iter <= cfg.irls_max_iter; ++iter) {
        for (Index i = 0; i < n; ++i) {
            const double a = std::abs(resid(i));
            sqrt_w(i) = a <= tau ? 1.0 : std::sqrt(tau / a);
        }
        const Vector next = weighted_solve(x, y, sqrt_w);
        const double step = (next - coef).norm();
        coef = next;
        resid = y - x * coef;
        out.iterations = iter;
        out.tau = tau;
        const double obj = huber_objective(resid, tau);
        out.objective_trace.push_back(obj);
        if (!fixed || obj <= best_obj) {
            best = coef;
            best_obj = obj;
        }
        if (step <= cfg.irls_tol * std::max(coef.norm(), coef_floor)) {
            out.converged = true;
            break;
        }
        if (!fixed) tau = tau_for(resid);
    }
    out.coef = out.converged ? coef : best;
    if (out.iterations == 0) out.tau = tau;
    return out;
}

}  // namespace huberfactor
