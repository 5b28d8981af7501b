#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace d3pi::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Threshold on the reciprocal condition number below which a matrix is
/// treated as singular.
inline constexpr double kMinRcond = 1e-12;

MatrixXd Kron(const MatrixXd& a, const MatrixXd& b);

/// The r x r all-ones matrix.
MatrixXd Ones(int r);

double SpectralRadius(const MatrixXd& a);

bool IsSymmetric(const MatrixXd& a, double tol);

MatrixXd Symmetrize(const MatrixXd& a);

/// Smallest eigenvalue of the symmetric part of `a`.
double MinEigenvalue(const MatrixXd& a);

/// Cholesky-based test on the symmetric part of `a`.
bool IsPositiveDefinite(const MatrixXd& a);

/// Estimated reciprocal 1-norm condition number (0 for singular input).
double ReciprocalCondition(const MatrixXd& a);

/// Inverse of a square matrix; throws NumericalError naming `what` when the
/// reciprocal condition number is below kMinRcond.
MatrixXd CheckedInverse(const MatrixXd& a, std::string_view what);

/// Solves P = A^T P A + Q for Schur-stable A using Smith's doubling
/// iteration. Throws NumericalError when rho(A) >= 1.
MatrixXd SolveDiscreteLyapunov(const MatrixXd& a, const MatrixXd& q);

/// Rank test on [B, AB, ..., A^{n-1}B].
bool IsControllable(const MatrixXd& a, const MatrixXd& b);

}  // namespace d3pi::linalg
