#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "d3pi/graph.h"

namespace d3pi {

/// Discrete-time agent x+ = A x + B u with (A, B) controllable.
class AgentModel {
 public:
  /// Throws DimensionError on shape mismatch and NumericalError when (A, B)
  /// is not controllable.
  AgentModel(Eigen::MatrixXd a, Eigen::MatrixXd b);

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int m() const { return static_cast<int>(b_.cols()); }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
};

/// Zero-order-hold discretization through the exponential of the augmented
/// matrix [[Ac, Bc], [0, 0]] dt.
AgentModel Discretize(const Eigen::MatrixXd& ac, const Eigen::MatrixXd& bc,
                      double dt);

struct NormalizedAgent {
  AgentModel agent;
  /// Physical state = scale.asDiagonal() * normalized state.
  Eigen::VectorXd scale;
};

/// Rescales each state coordinate by the square root of the corresponding
/// diagonal entry of the discrete controllability Gramian W = A W A^T + B B^T.
/// Requires a Schur-stable A.
NormalizedAgent NormalizeStates(const AgentModel& agent);

struct NetworkState {
  std::int64_t t = 0;
  Eigen::VectorXd x;  // N * n, agent-major
};

/// N identical agents with block-diagonal lifts I_N (x) A, I_N (x) B.
class CompoundSystem {
 public:
  static constexpr double kDivergenceThreshold = 1e12;

  CompoundSystem(AgentModel agent, int agents);

  const AgentModel& agent() const { return agent_; }
  int agents() const { return agents_; }
  int state_dim() const { return agents_ * agent_.n(); }
  int input_dim() const { return agents_ * agent_.m(); }

  /// x+_i = A x_i + B u_i for every agent. Throws DivergenceError when
  /// ||x+||_inf exceeds kDivergenceThreshold or is not finite.
  NetworkState Step(const NetworkState& state, const Eigen::VectorXd& u) const;

  /// Dense lifts, for diagnostics and model-based checks only.
  Eigen::MatrixXd DenseA() const;
  Eigen::MatrixXd DenseB() const;

 private:
  AgentModel agent_;
  int agents_;
};

/// Stacked states of the selection's members in their frozen order.
Eigen::VectorXd Observe(const NetworkState& state, const SubgraphSelection& sel,
                        int n);

/// Compound mN x nN gain used while the temporary links are on. Learning
/// agents see each other over the completed subgraph:
///   u_i = K x_i + L sum_{j in Gd, j != i} x_j,
/// so the restriction to the subgraph is I_d (x) (K - L) + 1 1^T (x) L.
/// Every other agent uses its original neighbors only:
///   u_i = (K - L) x_i + tau/(d-1) L sum_{j in N_i} x_j.
Eigen::MatrixXd BuildPolicyLearning(const Eigen::MatrixXd& k,
                                    const Eigen::MatrixXd& l, double tau,
                                    const CommGraph& g,
                                    const SubgraphSelection& sel);

/// Post-learning gain on the original topology with d = d_max + 1:
///   u_i = (K - L) x_i + tau/(d-1) L sum_{j in N_i} x_j.
Eigen::MatrixXd BuildPolicyFinal(const Eigen::MatrixXd& k,
                                 const Eigen::MatrixXd& l, double tau,
                                 const CommGraph& g);

/// Closed-loop black box. Holds the network state and the current compound
/// policy; the learner only reads subgraph slices through it.
class NetworkSimulator {
 public:
  /// Called after every step with the pre-step state and the applied input.
  using Observer =
      std::function<void(const NetworkState& before, const Eigen::VectorXd& u)>;

  NetworkSimulator(CompoundSystem system, NetworkState initial);

  const CompoundSystem& system() const { return system_; }
  const NetworkState& state() const { return state_; }

  void set_policy(const Eigen::MatrixXd& gain);
  const Eigen::MatrixXd& policy() const { return gain_; }
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// Full policy output at the current state.
  Eigen::VectorXd PolicyInput() const;

  Eigen::VectorXd ObserveSubgraph(const SubgraphSelection& sel) const;
  Eigen::VectorXd SubgraphPolicyInput(const SubgraphSelection& sel) const;

  /// Applies the policy to the whole network, adds `excitation` (length
  /// d*m) to the selection's inputs, and advances one step.
  void Advance(const SubgraphSelection& sel,
               const Eigen::VectorXd& excitation);
  void Advance();

 private:
  void StepWith(const Eigen::VectorXd& u);

  CompoundSystem system_;
  NetworkState state_;
  Eigen::MatrixXd gain_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_gain_;
  Observer observer_;
};

}  // namespace d3pi
