#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "d3pi/graph.h"
#include "d3pi/lti_network.h"
#include "d3pi/spe.h"

namespace d3pi {

/// Single-agent blocks read from a subgraph H estimate. Index 1 is the
/// diagonal block, index 2 the off-diagonal one.
struct BlockSet {
  Eigen::MatrixXd x1, x2;  // n x n, from H11
  Eigen::MatrixXd y1, y2;  // m x m, from H22
  Eigen::MatrixXd z1, z2;  // m x n, from H21

  Eigen::MatrixXd dx() const { return x1 - x2; }
  Eigen::MatrixXd dy() const { return y1 - y2; }
  Eigen::MatrixXd dz() const { return z1 - z2; }
};

/// Reads the (0,0) and (0,1) blocks of H11, H22 and H21. Throws
/// DimensionError when d < 2 or the estimate's shape is inconsistent.
BlockSet RecoverBlocks(const HEstimate& h);

struct FgPair {
  Eigen::MatrixXd f;
  Eigen::MatrixXd g;
};

/// H22^-1 = I_d (x) (F + G) - 1 1^T (x) G for H22 = I_d (x) (Y1 - Y2) +
/// 1 1^T (x) Y2. Throws NumericalError unless H22 is positive definite.
FgPair ComputeFg(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2, int d);

struct GainPair {
  Eigen::MatrixXd k;  // diagonal block of the subgraph gain
  Eigen::MatrixXd l;  // off-diagonal block
};

/// K = -F Z1 + (d-1) G Z2, L = -F Z2 + G Z1 + (d-2) G Z2, the pattern of
/// -H22^-1 H21.
GainPair UpdateGains(const FgPair& fg, const Eigen::MatrixXd& z1,
                     const Eigen::MatrixXd& z2, int d);

enum class XiVariant {
  /// dX - Q~ + Q2 + dK^T dZ + dZ^T dK + dK^T (dY - R) dK
  kAlgorithm,
  /// Same without the + Q2 term.
  kProof,
};

/// Symmetrized n x n margin matrix.
Eigen::MatrixXd ComputeXi(const BlockSet& blocks, const Eigen::MatrixXd& dk,
                          const Eigen::MatrixXd& q_tilde,
                          const Eigen::MatrixXd& q2, const Eigen::MatrixXd& r,
                          XiVariant variant = XiVariant::kAlgorithm);

struct Margin {
  double gamma = 0.0;
  double tau = 0.0;
  /// Set when the denominator vanished; tau is then 0.
  bool degenerate = false;
};

/// gamma = s_min(dK^T R dK + Q~) / s_max(Xi + L^T (dY - R) L),
/// tau = sqrt(gamma^2 / (1 + gamma)).
Margin ComputeMargin(const Eigen::MatrixXd& xi, const Eigen::MatrixXd& dk,
                     const Eigen::MatrixXd& l, const Eigen::MatrixXd& dy,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& q_tilde);

inline double TauFromGamma(double gamma) {
  return std::sqrt(gamma * gamma / (1.0 + gamma));
}

/// Controller components of one outer iteration. Iteration k's learning
/// phase runs with (k_gain, l_gain, tau); gamma and xi were computed at the
/// end of iteration k-1 (NaN / empty for k = 1).
struct GainState {
  int k = 1;
  Eigen::MatrixXd k_gain;
  Eigen::MatrixXd l_gain;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double tau = 0.0;
  Eigen::MatrixXd xi;
  bool margin_degenerate = false;
  /// SPE run that evaluated this gain (0 for the final entry).
  std::int64_t spe_steps = 0;
  double spe_seconds = 0.0;
  int spe_attempts = 0;
  double p_condition = 0.0;

  Eigen::MatrixXd dk() const { return k_gain - l_gain; }
};

struct D3piConfig {
  Eigen::MatrixXd q1, q2, r;
  /// Stop when max(||K+ - K||_F, ||L+ - L||_F) < tol.
  double tol = 1e-4;
  int max_iter = 50;
  SpeConfig spe;
  /// Stabilizing initial diagonal gain; required.
  Eigen::MatrixXd k1;
  /// Initial off-diagonal gain; zero when unset.
  std::optional<Eigen::MatrixXd> l1;
  XiVariant xi_variant = XiVariant::kAlgorithm;
  /// When false, agents outside the subgraph keep the self-feedback K1 while
  /// learning instead of the coordinated policy.
  bool coordinate_rest = true;
  std::uint64_t seed = 0;
};

struct D3piResult {
  Eigen::MatrixXd k;
  Eigen::MatrixXd l;
  double gamma = 0.0;
  double tau = 0.0;
  /// history[i] has k = i + 1. The last entry holds the converged gains.
  std::vector<GainState> history;
  SubgraphSelection selection;
  Eigen::MatrixXd final_policy;
  std::int64_t total_steps = 0;
  double spe_seconds = 0.0;
  bool converged = false;

  Eigen::MatrixXd dk() const { return k - l; }
};

/// Compound gain applied during iteration `state.k`'s learning phase.
Eigen::MatrixXd LearningPolicy(const GainState& state, const CommGraph& g,
                               const SubgraphSelection& sel,
                               const D3piConfig& cfg);

/// Runs the distributed policy iteration on `sim` over `g`. Every outer
/// iteration drives the network under the learning policy, estimates H by
/// SPE on the subgraph, and updates (K, L, gamma, tau). On success the
/// final distributed policy is installed on `sim`.
///
/// Throws NonConvergenceError when SPE fails twice in a row or the outer
/// loop hits max_iter, NumericalError when H22 is not positive definite,
/// DivergenceError when the plant blows up.
D3piResult RunD3pi(NetworkSimulator& sim, const CommGraph& g,
                   const D3piConfig& cfg);

}  // namespace d3pi
