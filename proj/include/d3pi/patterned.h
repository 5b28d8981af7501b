#pragma once

#include <Eigen/Dense>

namespace d3pi {

/// A block matrix with r identical n x n diagonal blocks and identical
/// off-diagonal blocks:
///
///   dense() = I_r (x) (diag - off) + 1_r 1_r^T (x) off.
///
/// Symmetric instances (both blocks symmetric) are the members of the
/// patterned linear group; products of two such matrices keep the block
/// pattern but may lose block symmetry, so general blocks are allowed too.
class PatternedMatrix {
 public:
  /// Builds a general (not necessarily symmetric) patterned matrix.
  /// Throws DimensionError for r < 1 or mismatched/non-square blocks.
  PatternedMatrix(int r, Eigen::MatrixXd diag, Eigen::MatrixXd off);

  int blocks() const { return r_; }
  int block_size() const { return static_cast<int>(diag_.rows()); }
  int size() const { return r_ * block_size(); }

  /// The repeated diagonal block.
  const Eigen::MatrixXd& diag() const { return diag_; }
  /// The repeated off-diagonal block.
  const Eigen::MatrixXd& off() const { return off_; }

  /// diag - off: the action on the subspace orthogonal to 1_r (x) R^n.
  Eigen::MatrixXd difference() const { return diag_ - off_; }
  /// diag + (r-1) off: the action on 1_r (x) R^n.
  Eigen::MatrixXd aggregate() const { return diag_ + (r_ - 1) * off_; }

  bool is_symmetric(double tol = 1e-10) const;

  PatternedMatrix transpose() const;

  Eigen::MatrixXd dense() const;

 private:
  int r_;
  Eigen::MatrixXd diag_;
  Eigen::MatrixXd off_;
};

namespace patterned {

/// Default symmetry tolerance for MakePatterned.
inline constexpr double kSymmetryTol = 1e-10;

/// Structured representation of I_r (x) (a - b) + 1 1^T (x) b with symmetric
/// blocks. Throws DimensionError (r < 2, shape mismatch) or StructureError
/// (asymmetry beyond `tol`).
PatternedMatrix MakePatterned(int r, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b,
                              double tol = kSymmetryTol);

struct Projection {
  PatternedMatrix matrix;
  /// max |m - dense(matrix)| over all entries.
  double residual;
};

/// Averages the diagonal blocks and the off-diagonal blocks of `m`. Never
/// fails on structure; reports the residual instead.
Projection Project(const Eigen::MatrixXd& m, int r);

/// Like Project, but throws StructureError when the residual exceeds `tol`.
Projection FromDense(const Eigen::MatrixXd& m, int r, double tol);

/// det(A - B)^(r-1) det(A + (r-1)B).
double Determinant(const PatternedMatrix& p);

/// True iff A - B and A + (r-1)B are both positive definite. Requires
/// symmetric blocks.
bool IsPositiveDefinite(const PatternedMatrix& p);

/// Closed-form inverse, again patterned: diagonal block F, off block -G with
///   F = (A - (r-1) B (A + (r-2)B)^-1 B)^-1,
///   G = (A + (r-1)B)^-1 B (A - B)^-1.
/// Throws NumericalError if any intermediate block is near-singular.
PatternedMatrix Inverse(const PatternedMatrix& p);

/// Block-pattern product: with P = I (x) (A-B) + 11^T (x) B and
/// Q = I (x) (C-D) + 11^T (x) D,
///   P Q = I (x) (A-B)(C-D) + 11^T (x) (B(C-D) + (A-B)D + r B D).
PatternedMatrix Multiply(const PatternedMatrix& p, const PatternedMatrix& q);

/// Solves P = Acl^T P Acl + Qc. The problem splits into two n x n discrete
/// Lyapunov equations, one for the aggregate (1-aligned) blocks and one for
/// the difference blocks. Throws NumericalError if Acl is not Schur stable
/// or Qc is not positive definite.
PatternedMatrix SolveLyapunov(const PatternedMatrix& acl,
                              const PatternedMatrix& qc);

}  // namespace patterned
}  // namespace d3pi
