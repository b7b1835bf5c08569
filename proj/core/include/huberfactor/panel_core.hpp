#pragma once

#include "huberfactor/panel.hpp"

namespace huberfactor {

/// Leading eigenpairs of a symmetric matrix, largest first.
struct EigenPair {
    Vector values;   ///< non-increasing
    Matrix vectors;  ///< column-orthonormal, one column per value
};

/// Diagonal +/-1 matrix resolving the sign indeterminacy of factor columns.
struct SignMatrix {
    Vector diag;

    Matrix as_matrix() const { return diag.asDiagonal(); }
};

/// Loadings and factors satisfying the identification conventions
/// L'L/N = I and F'F/T diagonal with non-increasing entries.
struct NormalizedFactors {
    Matrix loadings;  ///< N x r
    Matrix factors;   ///< T x r
};

/// A fitted factor model together with its residuals E = Y - L F'.
struct FactorFit {
    Matrix loadings;   ///< N x r
    Matrix factors;    ///< T x r
    Matrix residuals;  ///< N x T
    Index rank = 0;

    Matrix common_component() const { return loadings * factors.transpose(); }
};

/// (1/T) sum_t Y_t Y_t'. With `center`, each series is demeaned first.
Matrix second_moment(const Panel& panel, bool center = false);

/// The r leading eigenpairs of a symmetric matrix.
///
/// Eigenvectors are signed so that their largest-magnitude component is
/// positive (first such index on ties); equal eigenvalues keep ascending
/// order of the solver's original index.
EigenPair top_eigen(const Matrix& m, Index r);

/// Every eigenpair, same ordering and sign rules as top_eigen.
EigenPair full_eigen(const Matrix& m);

/// Rotates (L_raw, F_raw) into identified form while preserving L F'.
///
/// L <- L_raw A^{-1/2}, F <- F_raw A^{1/2} with A = L_raw'L_raw/N, followed by
/// the eigenvector rotation that diagonalizes F'F/T. Column signs follow the
/// top_eigen convention applied to L.
NormalizedFactors normalize_fit(const Matrix& loadings_raw, const Matrix& factors_raw);

/// sign of diag((1/T) F_hat' F_ref), with sign(0) = +1.
SignMatrix sign_align(const Matrix& factors_hat, const Matrix& factors_ref);

/// Builds a FactorFit (residuals included) from already normalized factors.
FactorFit make_fit(const Panel& panel, NormalizedFactors normalized);

/// Flips columns so the largest-magnitude entry of each column is positive.
/// Returns the applied signs.
Vector canonical_column_signs(Matrix& columns);

/// Max-norm distance of a'a/scale from the identity.
double orthonormality_defect(const Matrix& a, double scale = 1.0);

}  // namespace huberfactor
