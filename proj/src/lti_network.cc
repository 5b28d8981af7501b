#include "d3pi/lti_network.h"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "d3pi/errors.h"
#include "d3pi/linalg.h"

namespace d3pi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

AgentModel::AgentModel(MatrixXd a, MatrixXd b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows() || a_.rows() == 0 ||
      b_.cols() == 0) {
    throw DimensionError("agent: A must be n x n and B n x m");
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw NumericalError("agent: non-finite system matrices");
  }
  if (!linalg::IsControllable(a_, b_)) {
    throw NumericalError("agent: (A, B) is not controllable");
  }
}

AgentModel Discretize(const MatrixXd& ac, const MatrixXd& bc, double dt) {
  if (!(dt > 0.0)) throw DimensionError("discretize: dt must be positive");
  if (ac.rows() != ac.cols() || bc.rows() != ac.rows()) {
    throw DimensionError("discretize: Ac must be n x n and Bc n x m");
  }
  const Eigen::Index n = ac.rows();
  const Eigen::Index m = bc.cols();
  MatrixXd aug = MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = ac * dt;
  aug.topRightCorner(n, m) = bc * dt;
  const MatrixXd e = aug.exp();
  return AgentModel(e.topLeftCorner(n, n), e.topRightCorner(n, m));
}

NormalizedAgent NormalizeStates(const AgentModel& agent) {
  const MatrixXd gramian = linalg::SolveDiscreteLyapunov(
      agent.a().transpose(), agent.b() * agent.b().transpose());
  VectorXd scale = gramian.diagonal().cwiseSqrt();
  if ((scale.array() <= 0.0).any()) {
    throw NumericalError("normalize: degenerate controllability Gramian");
  }
  const VectorXd inv = scale.cwiseInverse();
  MatrixXd a = inv.asDiagonal() * agent.a() * scale.asDiagonal();
  MatrixXd b = inv.asDiagonal() * agent.b();
  return {AgentModel(std::move(a), std::move(b)), std::move(scale)};
}

CompoundSystem::CompoundSystem(AgentModel agent, int agents)
    : agent_(std::move(agent)), agents_(agents) {
  if (agents_ < 1) throw DimensionError("network: need at least one agent");
}

NetworkState CompoundSystem::Step(const NetworkState& state,
                                  const VectorXd& u) const {
  const int n = agent_.n();
  const int m = agent_.m();
  if (state.x.size() != state_dim() || u.size() != input_dim()) {
    throw DimensionError("step: state or input has the wrong length");
  }
  NetworkState next{state.t + 1, VectorXd(state_dim())};
  for (int i = 0; i < agents_; ++i) {
    next.x.segment(i * n, n).noalias() =
        agent_.a() * state.x.segment(i * n, n) +
        agent_.b() * u.segment(i * m, m);
  }
  const double peak = next.x.size() ? next.x.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(peak) || peak > kDivergenceThreshold) {
    throw DivergenceError("network diverged at t = " +
                          std::to_string(next.t));
  }
  return next;
}

MatrixXd CompoundSystem::DenseA() const {
  return linalg::Kron(MatrixXd::Identity(agents_, agents_), agent_.a());
}

MatrixXd CompoundSystem::DenseB() const {
  return linalg::Kron(MatrixXd::Identity(agents_, agents_), agent_.b());
}

VectorXd Observe(const NetworkState& state, const SubgraphSelection& sel,
                 int n) {
  VectorXd out(sel.size() * n);
  for (int p = 0; p < sel.size(); ++p) {
    const int node = sel.members[p];
    if ((node + 1) * n > state.x.size() || node < 0) {
      throw DimensionError("observe: selection outside the network");
    }
    out.segment(p * n, n) = state.x.segment(node * n, n);
  }
  return out;
}

namespace {

void CheckGainShapes(const MatrixXd& k, const MatrixXd& l) {
  if (k.rows() != l.rows() || k.cols() != l.cols() || k.size() == 0) {
    throw DimensionError("policy: K and L must both be m x n");
  }
}

}  // namespace

MatrixXd BuildPolicyLearning(const MatrixXd& k, const MatrixXd& l,
                             double tau, const CommGraph& g,
                             const SubgraphSelection& sel) {
  CheckGainShapes(k, l);
  const int d = sel.size();
  if (d < 2) throw DimensionError("policy: subgraph needs at least 2 nodes");
  const int m = static_cast<int>(k.rows());
  const int n = static_cast<int>(k.cols());
  const int nodes = g.node_count();
  MatrixXd gain = MatrixXd::Zero(m * nodes, n * nodes);
  const MatrixXd self = k - l;
  const MatrixXd coupling = (tau / (d - 1)) * l;
  for (int i = 0; i < nodes; ++i) {
    if (sel.contains(i)) {
      for (int j : sel.members) {
        gain.block(i * m, j * n, m, n) = (i == j) ? k : l;
      }
    } else {
      gain.block(i * m, i * n, m, n) = self;
      for (int j : g.neighbors(i)) gain.block(i * m, j * n, m, n) = coupling;
    }
  }
  return gain;
}

MatrixXd BuildPolicyFinal(const MatrixXd& k, const MatrixXd& l, double tau,
                          const CommGraph& g) {
  CheckGainShapes(k, l);
  const int m = static_cast<int>(k.rows());
  const int n = static_cast<int>(k.cols());
  const int nodes = g.node_count();
  const int d = MaxDegree(g) + 1;
  MatrixXd gain = MatrixXd::Zero(m * nodes, n * nodes);
  const MatrixXd self = k - l;
  const MatrixXd coupling =
      d > 1 ? MatrixXd((tau / (d - 1)) * l) : MatrixXd::Zero(m, n);
  for (int i = 0; i < nodes; ++i) {
    gain.block(i * m, i * n, m, n) = self;
    for (int j : g.neighbors(i)) gain.block(i * m, j * n, m, n) = coupling;
  }
  return gain;
}

NetworkSimulator::NetworkSimulator(CompoundSystem system, NetworkState initial)
    : system_(std::move(system)), state_(std::move(initial)) {
  if (state_.x.size() != system_.state_dim()) {
    throw DimensionError("simulator: initial state has the wrong length");
  }
  set_policy(MatrixXd::Zero(system_.input_dim(), system_.state_dim()));
}

void NetworkSimulator::set_policy(const MatrixXd& gain) {
  if (gain.rows() != system_.input_dim() ||
      gain.cols() != system_.state_dim()) {
    throw DimensionError("simulator: policy must be mN x nN");
  }
  gain_ = gain;
  sparse_gain_ = gain.sparseView();
}

VectorXd NetworkSimulator::PolicyInput() const { return sparse_gain_ * state_.x; }

VectorXd NetworkSimulator::ObserveSubgraph(const SubgraphSelection& sel) const {
  return Observe(state_, sel, system_.agent().n());
}

VectorXd NetworkSimulator::SubgraphPolicyInput(
    const SubgraphSelection& sel) const {
  const int m = system_.agent().m();
  VectorXd out(sel.size() * m);
  for (int p = 0; p < sel.size(); ++p) {
    for (int r = 0; r < m; ++r) {
      out(p * m + r) = sparse_gain_.row(sel.members[p] * m + r).dot(state_.x);
    }
  }
  return out;
}

void NetworkSimulator::Advance(const SubgraphSelection& sel,
                               const VectorXd& excitation) {
  const int m = system_.agent().m();
  if (excitation.size() != sel.size() * m) {
    throw DimensionError("simulator: excitation must have length d*m");
  }
  VectorXd u = PolicyInput();
  for (int p = 0; p < sel.size(); ++p) {
    u.segment(sel.members[p] * m, m) += excitation.segment(p * m, m);
  }
  StepWith(u);
}

void NetworkSimulator::Advance() { StepWith(PolicyInput()); }

void NetworkSimulator::StepWith(const VectorXd& u) {
  NetworkState next = system_.Step(state_, u);
  if (observer_) observer_(state_, u);
  state_ = std::move(next);
}

}  // namespace d3pi
