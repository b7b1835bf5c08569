#pragma once

#include <optional>
#include <vector>

#include "huberfactor/panel.hpp"

namespace huberfactor {

/// How the Huber threshold tau is chosen inside a regression.
struct TauPolicy {
    enum class Kind { fixed, mad_scaled };

    Kind kind = Kind::mad_scaled;
    /// tau itself for `fixed`, the multiplier c for `mad_scaled`.
    double value = 1.345;

    static TauPolicy fixed(double tau) { return {Kind::fixed, tau}; }
    static TauPolicy mad_scaled(double c = 1.345) { return {Kind::mad_scaled, c}; }
};

struct HuberConfig {
    TauPolicy tau = TauPolicy::mad_scaled();
    double irls_tol = 1e-8;  ///< relative coefficient change declaring convergence
    int irls_max_iter = 100;

    /// Throws ParameterError when any field is out of range.
    void validate() const;
};

double huber_loss(double x, double tau);
/// Derivative of huber_loss: x inside [-tau, tau], tau * sign(x) outside.
double huber_psi(double x, double tau);
/// IRLS weight psi(x)/x, equal to 1 inside the threshold.
double huber_weight(double x, double tau);

/// sum_i H_tau(residual_i).
double huber_objective(const Vector& residuals, double tau);

struct HuberRegressionResult {
    Vector coef;
    bool converged = false;
    int iterations = 0;
    double tau = 0.0;  ///< threshold used by the final sweep
    /// sum_i H_tau(y_i - x_i'b) at the starting point and after every sweep,
    /// each evaluated with the tau of that sweep.
    std::vector<double> objective_trace;
};

/// Huber M-estimate of y on X by iteratively reweighted least squares.
///
/// Starts from `init` when given, otherwise from OLS. Each sweep solves a
/// weighted least-squares problem through a column-pivoted QR; a design whose
/// weighted condition number exceeds 1e12 raises DegeneracyError. Reaching
/// irls_max_iter is not an error: the best iterate is returned with
/// converged = false.
HuberRegressionResult huber_regress(const Vector& y, const Matrix& x, const HuberConfig& cfg,
                                    const std::optional<Vector>& init = std::nullopt);

/// c * 1.4826 * MAD(residuals), floored at 1e-8 * scale.
double mad_tau(const Vector& residuals, double c, double scale);

}  // namespace huberfactor
