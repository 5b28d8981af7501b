#include "d3pi/linalg.h"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "d3pi/errors.h"

namespace d3pi::linalg {

MatrixXd Kron(const MatrixXd& a, const MatrixXd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

MatrixXd Ones(int r) { return MatrixXd::Ones(r, r); }

double SpectralRadius(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool IsSymmetric(const MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

MatrixXd Symmetrize(const MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

double MinEigenvalue(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(a),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool IsPositiveDefinite(const MatrixXd& a) {
  Eigen::LLT<MatrixXd> llt(Symmetrize(a));
  return llt.info() == Eigen::Success;
}

double ReciprocalCondition(const MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("condition number of a non-square matrix");
  }
  if (a.size() == 0) return 1.0;
  if (!a.allFinite()) return 0.0;
  return Eigen::PartialPivLU<MatrixXd>(a).rcond();
}

MatrixXd CheckedInverse(const MatrixXd& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  Eigen::PartialPivLU<MatrixXd> lu(a);
  if (!a.allFinite() || lu.rcond() < kMinRcond) {
    throw NumericalError(std::string(what) + ": singular or ill-conditioned");
  }
  return lu.inverse();
}

MatrixXd SolveDiscreteLyapunov(const MatrixXd& a, const MatrixXd& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
    throw DimensionError("Lyapunov: dimension mismatch");
  }
  if (SpectralRadius(a) >= 1.0) {
    throw NumericalError("Lyapunov: system matrix is not Schur stable");
  }
  // P = sum_j (A^T)^j Q A^j, accumulated two-fold per pass.
  MatrixXd p = q;
  MatrixXd ak = a;
  for (int iter = 0; iter < 200; ++iter) {
    MatrixXd next = p + ak.transpose() * p * ak;
    const double change = (next - p).norm();
    p = next;
    ak = ak * ak;
    if (change <= 1e-16 * std::max(1.0, p.norm()) || ak.norm() < 1e-300) {
      break;
    }
  }
  return Symmetrize(p);
}

bool IsControllable(const MatrixXd& a, const MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.rows() != n) {
    throw DimensionError("controllability: dimension mismatch");
  }
  const int m = static_cast<int>(b.cols());
  MatrixXd ctrb(n, n * m);
  MatrixXd block = b;
  for (int i = 0; i < n; ++i) {
    ctrb.middleCols(i * m, m) = block;
    block = a * block;
  }
  Eigen::JacobiSVD<MatrixXd> svd(ctrb);
  const auto& s = svd.singularValues();
  if (s.size() < n || s(0) == 0.0) return false;
  return s(n - 1) > 1e-10 * s(0);
}

}  // namespace d3pi::linalg
