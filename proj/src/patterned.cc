#include "d3pi/patterned.h"

#include <cmath>
#include <string>

#include "d3pi/errors.h"
#include "d3pi/linalg.h"

namespace d3pi {

using Eigen::MatrixXd;

PatternedMatrix::PatternedMatrix(int r, MatrixXd diag, MatrixXd off)
    : r_(r), diag_(std::move(diag)), off_(std::move(off)) {
  if (r_ < 1) throw DimensionError("patterned: block count must be >= 1");
  if (diag_.rows() != diag_.cols() || off_.rows() != off_.cols() ||
      diag_.rows() != off_.rows()) {
    throw DimensionError("patterned: blocks must be square and equal-sized");
  }
}

bool PatternedMatrix::is_symmetric(double tol) const {
  return linalg::IsSymmetric(diag_, tol) && linalg::IsSymmetric(off_, tol);
}

PatternedMatrix PatternedMatrix::transpose() const {
  return PatternedMatrix(r_, diag_.transpose(), off_.transpose());
}

MatrixXd PatternedMatrix::dense() const {
  const int n = block_size();
  MatrixXd out(r_ * n, r_ * n);
  for (int i = 0; i < r_; ++i) {
    for (int j = 0; j < r_; ++j) {
      out.block(i * n, j * n, n, n) = (i == j) ? diag_ : off_;
    }
  }
  return out;
}

namespace patterned {

PatternedMatrix MakePatterned(int r, const MatrixXd& a, const MatrixXd& b,
                              double tol) {
  if (r < 2) throw DimensionError("patterned: r must be >= 2");
  PatternedMatrix p(r, a, b);
  if (!linalg::IsSymmetric(a, tol) || !linalg::IsSymmetric(b, tol)) {
    const double asym = std::max((a - a.transpose()).cwiseAbs().maxCoeff(),
                                 (b - b.transpose()).cwiseAbs().maxCoeff());
    throw StructureError("patterned: blocks are not symmetric", asym);
  }
  return p;
}

Projection Project(const MatrixXd& m, int r) {
  if (r < 1 || m.rows() != m.cols() || m.rows() % r != 0) {
    throw DimensionError("patterned: side is not divisible by block count");
  }
  const int n = static_cast<int>(m.rows()) / r;
  MatrixXd diag = MatrixXd::Zero(n, n);
  MatrixXd off = MatrixXd::Zero(n, n);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      if (i == j) {
        diag += m.block(i * n, j * n, n, n);
      } else {
        off += m.block(i * n, j * n, n, n);
      }
    }
  }
  diag /= r;
  if (r > 1) off /= static_cast<double>(r) * (r - 1);
  PatternedMatrix p(r, std::move(diag), std::move(off));
  const double residual =
      m.size() == 0 ? 0.0 : (m - p.dense()).cwiseAbs().maxCoeff();
  return {std::move(p), residual};
}

Projection FromDense(const MatrixXd& m, int r, double tol) {
  Projection proj = Project(m, r);
  if (!(proj.residual <= tol)) {
    throw StructureError("patterned: matrix is not block-patterned (residual " +
                             std::to_string(proj.residual) + ")",
                         proj.residual);
  }
  return proj;
}

double Determinant(const PatternedMatrix& p) {
  const double d_diff = p.difference().determinant();
  const double d_agg = p.aggregate().determinant();
  return std::pow(d_diff, p.blocks() - 1) * d_agg;
}

bool IsPositiveDefinite(const PatternedMatrix& p) {
  if (!p.is_symmetric()) {
    throw StructureError("patterned: PD test needs symmetric blocks", 0.0);
  }
  return linalg::IsPositiveDefinite(p.difference()) &&
         linalg::IsPositiveDefinite(p.aggregate());
}

PatternedMatrix Inverse(const PatternedMatrix& p) {
  const int r = p.blocks();
  const MatrixXd& a = p.diag();
  const MatrixXd& b = p.off();
  const MatrixXd inv_diff = linalg::CheckedInverse(a - b, "inverse: A - B");
  const MatrixXd inv_agg =
      linalg::CheckedInverse(a + (r - 1) * b, "inverse: A + (r-1)B");
  const MatrixXd inv_mid =
      linalg::CheckedInverse(a + (r - 2) * b, "inverse: A + (r-2)B");
  const MatrixXd f = linalg::CheckedInverse(
      a - (r - 1) * b * inv_mid * b, "inverse: A - (r-1)B(A+(r-2)B)^-1 B");
  const MatrixXd g = inv_agg * b * inv_diff;
  return PatternedMatrix(r, f, -g);
}

PatternedMatrix Multiply(const PatternedMatrix& p, const PatternedMatrix& q) {
  if (p.blocks() != q.blocks() || p.block_size() != q.block_size()) {
    throw DimensionError("patterned: product of mismatched operands");
  }
  const int r = p.blocks();
  const MatrixXd pd = p.difference();
  const MatrixXd qd = q.difference();
  const MatrixXd diff = pd * qd;
  const MatrixXd off = p.off() * qd + pd * q.off() + r * p.off() * q.off();
  return PatternedMatrix(r, diff + off, off);
}

PatternedMatrix SolveLyapunov(const PatternedMatrix& acl,
                              const PatternedMatrix& qc) {
  if (acl.blocks() != qc.blocks() || acl.block_size() != qc.block_size()) {
    throw DimensionError("patterned Lyapunov: mismatched operands");
  }
  if (!qc.is_symmetric(1e-9) || !IsPositiveDefinite(qc)) {
    throw NumericalError("patterned Lyapunov: Qc is not positive definite");
  }
  const int r = acl.blocks();
  const double rho = std::max(linalg::SpectralRadius(acl.aggregate()),
                              linalg::SpectralRadius(acl.difference()));
  if (rho >= 1.0) {
    throw NumericalError("patterned Lyapunov: Acl is not Schur stable");
  }
  const MatrixXd p_agg =
      linalg::SolveDiscreteLyapunov(acl.aggregate(), qc.aggregate());
  const MatrixXd p_diff =
      linalg::SolveDiscreteLyapunov(acl.difference(), qc.difference());
  // aggregate = diag + (r-1) off, difference = diag - off.
  const MatrixXd off = (p_agg - p_diff) / r;
  return PatternedMatrix(r, p_diff + off, off);
}

}  // namespace patterned
}  // namespace d3pi
