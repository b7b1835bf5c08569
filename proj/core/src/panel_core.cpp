#include "huberfactor/panel_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "huberfactor/errors.hpp"

namespace huberfactor {

namespace {

constexpr double kSymmetryTol = 1e-10;
// Relative pivot size below which loadings count as rank deficient.
constexpr double kLoadingsRankTol = 1e-12;

void require_symmetric(const Matrix& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw ValidationError(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", expected square");
    }
    if (m.size() == 0) return;
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * scale) {
        throw ValidationError(std::string(who) + ": matrix is not symmetric (max asymmetry " +
                              std::to_string(asym) + ")");
    }
}

// Index of the first column that breaks full column rank, or -1.
Index first_deficient_column(const Matrix& a, double relative_tol) {
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    qr.setThreshold(relative_tol);
    const Index rank = qr.rank();
    if (rank >= a.cols()) return -1;
    return qr.colsPermutation().indices()(rank);
}

Matrix symmetric_power(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double power) {
    const Vector scaled = es.eigenvalues().array().pow(power).matrix();
    return es.eigenvectors() * scaled.asDiagonal() * es.eigenvectors().transpose();
}

EigenPair sorted_eigen(const Matrix& m, Index r) {
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) {
        throw DegeneracyError("top_eigen: eigen solver did not converge");
    }
    const Index n = sym.rows();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&ev](Index a, Index b) { return ev(a) > ev(b); });

    EigenPair out;
    out.values.resize(r);
    out.vectors.resize(n, r);
    for (Index j = 0; j < r; ++j) {
        const Index src = order[static_cast<std::size_t>(j)];
        out.values(j) = ev(src);
        out.vectors.col(j) = es.eigenvectors().col(src);
    }
    canonical_column_signs(out.vectors);
    return out;
}

}  // namespace

Matrix second_moment(const Panel& panel, bool center) {
    const double t = static_cast<double>(panel.n_times());
    if (!center) {
        Matrix out = Matrix::Zero(panel.n_series(), panel.n_series());
        out.selfadjointView<Eigen::Lower>().rankUpdate(panel.values(), 1.0 / t);
        return out.selfadjointView<Eigen::Lower>();
    }
    const Matrix centered = panel.values().colwise() - panel.values().rowwise().mean();
    Matrix out = Matrix::Zero(panel.n_series(), panel.n_series());
    out.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / t);
    return out.selfadjointView<Eigen::Lower>();
}

EigenPair top_eigen(const Matrix& m, Index r) {
    require_symmetric(m, "top_eigen");
    if (r < 1 || r > m.rows()) {
        throw DimensionError("top_eigen: requested r=" + std::to_string(r) + " eigenpairs of a " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.rows()) + " matrix");
    }
    return sorted_eigen(m, r);
}

EigenPair full_eigen(const Matrix& m) {
    require_symmetric(m, "full_eigen");
    return sorted_eigen(m, m.rows());
}

Vector canonical_column_signs(Matrix& columns) {
    Vector signs = Vector::Ones(columns.cols());
    for (Index j = 0; j < columns.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < columns.rows(); ++i) {
            const double a = std::abs(columns(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (columns.rows() > 0 && columns(arg, j) < 0.0) {
            columns.col(j) *= -1.0;
            signs(j) = -1.0;
        }
    }
    return signs;
}

NormalizedFactors normalize_fit(const Matrix& loadings_raw, const Matrix& factors_raw) {
    const Index r = loadings_raw.cols();
    if (r < 1 || factors_raw.cols() != r) {
        throw DimensionError("normalize_fit: loadings have " + std::to_string(r) + " columns, factors " +
                             std::to_string(factors_raw.cols()));
    }
    if (loadings_raw.rows() < r || factors_raw.rows() < r) {
        throw DimensionError("normalize_fit: rank " + std::to_string(r) + " exceeds N=" +
                             std::to_string(loadings_raw.rows()) + " or T=" + std::to_string(factors_raw.rows()));
    }
    if (const Index bad = first_deficient_column(loadings_raw, kLoadingsRankTol); bad >= 0) {
        throw DegeneracyError("normalize_fit: loadings are rank deficient at factor index " + std::to_string(bad));
    }
    // Trailing factors of an over-specified rank legitimately sit at the noise
    // floor, so only an identically zero factor counts as deficient.
    for (Index j = 0; j < r; ++j) {
        if (factors_raw.col(j).isZero(0.0)) {
            throw DegeneracyError("normalize_fit: factors are rank deficient at factor index " + std::to_string(j));
        }
    }

    const double n = static_cast<double>(loadings_raw.rows());
    const double t = static_cast<double>(factors_raw.rows());

    const Matrix gram = loadings_raw.transpose() * loadings_raw / n;
    Eigen::SelfAdjointEigenSolver<Matrix> gram_es(0.5 * (gram + gram.transpose()));
    const Matrix gram_half = symmetric_power(gram_es, 0.5);
    const Matrix gram_inv_half = symmetric_power(gram_es, -0.5);

    Matrix loadings = loadings_raw * gram_inv_half;
    Matrix factors = factors_raw * gram_half;

    const Matrix factor_moment = factors.transpose() * factors / t;
    const EigenPair rotation = sorted_eigen(factor_moment, r);
    loadings = loadings * rotation.vectors;
    factors = factors * rotation.vectors;

    const Vector signs = canonical_column_signs(loadings);
    factors = factors * signs.asDiagonal();
    return {std::move(loadings), std::move(factors)};
}

SignMatrix sign_align(const Matrix& factors_hat, const Matrix& factors_ref) {
    if (factors_hat.rows() != factors_ref.rows() || factors_hat.cols() != factors_ref.cols()) {
        throw DimensionError("sign_align: shapes " + std::to_string(factors_hat.rows()) + "x" +
                             std::to_string(factors_hat.cols()) + " and " + std::to_string(factors_ref.rows()) +
                             "x" + std::to_string(factors_ref.cols()) + " differ");
    }
    SignMatrix s;
    s.diag.resize(factors_hat.cols());
    const double t = static_cast<double>(std::max<Index>(factors_hat.rows(), 1));
    for (Index j = 0; j < factors_hat.cols(); ++j) {
        const double cross = factors_hat.col(j).dot(factors_ref.col(j)) / t;
        s.diag(j) = cross >= 0.0 ? 1.0 : -1.0;
    }
    return s;
}

FactorFit make_fit(const Panel& panel, NormalizedFactors normalized) {
    if (normalized.loadings.rows() != panel.n_series() || normalized.factors.rows() != panel.n_times() ||
        normalized.loadings.cols() != normalized.factors.cols()) {
        throw DimensionError("make_fit: factor shapes do not match the panel");
    }
    FactorFit fit;
    fit.rank = normalized.loadings.cols();
    fit.residuals = panel.values() - normalized.loadings * normalized.factors.transpose();
    fit.loadings = std::move(normalized.loadings);
    fit.factors = std::move(normalized.factors);
    return fit;
}

double orthonormality_defect(const Matrix& a, double scale) {
    const Matrix gram = a.transpose() * a / scale;
    return (gram - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
}

}  // namespace huberfactor
