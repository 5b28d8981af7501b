#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "d3pi/graph.h"
#include "d3pi/lti_network.h"

namespace d3pi {

/// Upper-triangle monomials [z1^2, z1 z2, ..., z1 zp, z2^2, ..., zp^2], so
/// that z^T H z = QuadFeatures(z)^T HalfVectorize(H).
Eigen::VectorXd QuadFeatures(const Eigen::VectorXd& z);

/// Row-major upper triangle of symmetric H with off-diagonals doubled.
Eigen::VectorXd HalfVectorize(const Eigen::MatrixXd& h);

/// Inverse of HalfVectorize; off-diagonal coefficients are halved.
Eigen::MatrixXd InverseHalfVectorize(const Eigen::VectorXd& theta, int p);

/// Number of unknowns p(p+1)/2.
inline int UnknownCount(int p) { return p * (p + 1) / 2; }

/// QuadFeatures(z_t) - QuadFeatures(z_next). With this regressor the Bellman
/// relation z_t^T H z_t - z_next^T H z_next = cost holds exactly.
Eigen::VectorXd Regressor(const Eigen::VectorXd& z_t,
                          const Eigen::VectorXd& z_next);

/// QuadFeatures(z_t - z_next): the product-of-differences form. Kept only
/// for comparison; it does not satisfy the Bellman identity in general.
Eigen::VectorXd LiteralRegressor(const Eigen::VectorXd& z_t,
                                 const Eigen::VectorXd& z_next);

/// x^T Qc x + u^T Rc u.
double LocalCost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                 const Eigen::MatrixXd& qc, const Eigen::MatrixXd& rc);

struct RlsState {
  Eigen::VectorXd theta;
  Eigen::MatrixXd p;
  std::int64_t steps = 0;

  /// theta0 with covariance factor beta * I.
  static RlsState Init(Eigen::VectorXd theta0, double beta);
};

/// theta += P z (target - z^T theta) / (1 + z^T P z);
/// P -= P z z^T P / (1 + z^T P z).
/// Throws NumericalError when the update is not finite.
void RlsUpdate(RlsState& s, const Eigen::VectorXd& zeta, double target);
RlsState RlsStep(RlsState s, const Eigen::VectorXd& zeta, double target);

/// Estimated cost matrix of the subgraph Q-function, p = d (n + m).
struct HEstimate {
  Eigen::MatrixXd h;
  int d = 0;
  int n = 0;
  int m = 0;

  HEstimate() = default;
  HEstimate(Eigen::MatrixXd h, int d, int n, int m);

  int p() const { return d * (n + m); }
  Eigen::MatrixXd h11() const { return h.topLeftCorner(d * n, d * n); }
  Eigen::MatrixXd h21() const { return h.bottomLeftCorner(d * m, d * n); }
  Eigen::MatrixXd h22() const { return h.bottomRightCorner(d * m, d * m); }
};

/// Replaces every diagonal block of `m` (block shape rb x cb, d x d blocks)
/// by their mean, and every off-diagonal block likewise.
Eigen::MatrixXd ProjectBlockPattern(const Eigen::MatrixXd& m, int d, int rb,
                                    int cb);

/// Projects H11, H21 (and H12 = H21^T) and H22 onto the block pattern.
HEstimate ProjectStructure(const HEstimate& est);

struct SpeConfig {
  /// Initial covariance factor P0 = beta * I.
  double beta = 1e6;
  /// Exploration covariance Sigma = noise_variance * I (d*m square) unless
  /// `covariance` is non-empty.
  double noise_variance = 0.01;
  Eigen::MatrixXd covariance;
  /// Stop when ||theta_t - theta_{t-window}||_inf < tol * max(1, ||theta||_inf).
  double tol = 1e-6;
  int window = 10;
  /// 0 selects 5 * p(p+1)/2.
  std::int64_t max_steps = 0;
  /// 0 selects p(p+1)/2.
  std::int64_t min_steps = 0;
  bool project_structure = true;
  bool literal_regressor = false;
  bool record_trace = false;
};

struct SpeTraceRow {
  std::int64_t t;
  double residual;  // target - zeta^T theta before the update
  double theta_norm;
};

struct SpeResult {
  HEstimate estimate;
  bool converged = false;
  std::int64_t steps = 0;
  /// Condition number of the final covariance factor (diagnostic only).
  double p_condition = 0.0;
  std::vector<SpeTraceRow> trace;
};

/// Subgraph policy evaluation. Drives the whole network under its current
/// policy, excites only the selection's inputs with N(0, Sigma) noise, and
/// fits H by recursive least squares on the subgraph's states and inputs.
/// `qc`, `rc` are the dense subgraph stage-cost matrices. Non-convergence
/// (including lack of excitation) is reported through `converged`;
/// simulator divergence propagates as DivergenceError.
SpeResult RunSpe(NetworkSimulator& sim, const SubgraphSelection& sel,
                 const Eigen::MatrixXd& qc, const Eigen::MatrixXd& rc,
                 const HEstimate& h_prev, const SpeConfig& cfg,
                 std::mt19937_64& rng);

/// Writes the trace as CSV: t,residual,theta_norm.
void WriteSpeTrace(const std::vector<SpeTraceRow>& trace, std::ostream& out);

}  // namespace d3pi
