#include "d3pi/lqr_oracle.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "d3pi/errors.h"
#include "d3pi/linalg.h"
#include "d3pi/patterned.h"

namespace d3pi::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kDareMaxIter = 100000;
constexpr double kDareTol = 1e-12;
constexpr double kProjectionTol = 1e-6;

}  // namespace

MatrixXd DareSolve(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                   const MatrixXd& r) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || q.rows() != a.rows() ||
      q.cols() != a.cols() || r.rows() != b.cols() || r.cols() != b.cols()) {
    throw DimensionError("dare: dimension mismatch");
  }
  MatrixXd p = q;
  for (int it = 0; it < kDareMaxIter; ++it) {
    const MatrixXd pb = p * b;
    const MatrixXd s = r + b.transpose() * pb;
    const MatrixXd gain = s.ldlt().solve(pb.transpose() * a);
    MatrixXd next = q + a.transpose() * p * a - a.transpose() * pb * gain;
    next = linalg::Symmetrize(next);
    if (!next.allFinite()) throw NumericalError("dare: iteration blew up");
    const double change = (next - p).norm();
    p = std::move(next);
    if (change <= kDareTol * std::max(1.0, p.norm())) return p;
  }
  throw NonConvergenceError("dare: no convergence in 1e5 iterations");
}

MatrixXd DareGain(const MatrixXd& a, const MatrixXd& b, const MatrixXd& r,
                  const MatrixXd& p) {
  const MatrixXd s = r + b.transpose() * p * b;
  return -s.ldlt().solve(b.transpose() * p * a);
}

MatrixXd CostToGo::tilde() const {
  return PatternedMatrix(d, p1, p2).dense();
}

MatrixXd SubgraphGain(const MatrixXd& k, const MatrixXd& l, int d) {
  if (k.rows() != l.rows() || k.cols() != l.cols()) {
    throw DimensionError("subgraph gain: K and L differ in shape");
  }
  return linalg::Kron(MatrixXd::Identity(d, d), k - l) +
         linalg::Kron(linalg::Ones(d), l);
}

StructuredSolution StructuredOptimal(const AgentModel& agent,
                                     const MatrixXd& q1, const MatrixXd& q2,
                                     const MatrixXd& r, int d) {
  if (d < 2) throw DimensionError("structured optimal: need d >= 2");
  const SubgraphCost cost = MakeSubgraphCost(d, q1, q2, r);
  const MatrixXd eye = MatrixXd::Identity(d, d);
  const MatrixXd at = linalg::Kron(eye, agent.a());
  const MatrixXd bt = linalg::Kron(eye, agent.b());
  const MatrixXd rc = cost.r.dense();
  const MatrixXd pt = DareSolve(at, bt, cost.q.dense(), rc);

  StructuredSolution out;
  out.k_tilde = DareGain(at, bt, rc, pt);
  const int m = agent.m();
  const int n = agent.n();
  const MatrixXd kproj = ProjectBlockPattern(out.k_tilde, d, m, n);
  const auto pp = patterned::Project(pt, d);
  out.gain_residual = (out.k_tilde - kproj).cwiseAbs().maxCoeff();
  out.cost_residual = pp.residual;
  const double kscale = std::max(1.0, out.k_tilde.cwiseAbs().maxCoeff());
  const double pscale = std::max(1.0, pt.cwiseAbs().maxCoeff());
  if (out.gain_residual > kProjectionTol * kscale) {
    throw StructureError("structured optimal: gain is not patterned",
                         out.gain_residual);
  }
  if (pp.residual > kProjectionTol * pscale) {
    throw StructureError("structured optimal: cost-to-go is not patterned",
                         pp.residual);
  }
  out.k = kproj.topLeftCorner(m, n);
  out.l = kproj.block(0, n, m, n);
  out.cost.p1 = pp.matrix.diag();
  out.cost.p2 = pp.matrix.off();
  out.cost.d = d;
  return out;
}

double EvaluatePolicyCost(const MatrixXd& k_hat, const CommGraph& g,
                          const AgentModel& agent, const MatrixXd& q1,
                          const MatrixXd& q2, const MatrixXd& r) {
  const int nodes = g.node_count();
  if (k_hat.rows() != nodes * agent.m() || k_hat.cols() != nodes * agent.n()) {
    throw DimensionError("policy cost: gain must be mN x nN");
  }
  const CompoundCost cost = MakeCompoundCost(g, q1, q2, r);
  const MatrixXd eye = MatrixXd::Identity(nodes, nodes);
  const MatrixXd acl = linalg::Kron(eye, agent.a()) +
                       linalg::Kron(eye, agent.b()) * k_hat;
  const MatrixXd qk = cost.q + k_hat.transpose() * cost.r * k_hat;
  return linalg::SolveDiscreteLyapunov(acl, qk).trace();
}

MatrixXd SubgraphCostToGo(const AgentModel& agent, const MatrixXd& qc,
                          const MatrixXd& rc, const MatrixXd& k_tilde, int d) {
  const MatrixXd eye = MatrixXd::Identity(d, d);
  const MatrixXd at = linalg::Kron(eye, agent.a());
  const MatrixXd bt = linalg::Kron(eye, agent.b());
  if (k_tilde.rows() != bt.cols() || k_tilde.cols() != at.cols() ||
      qc.rows() != at.rows() || rc.rows() != bt.cols()) {
    throw DimensionError("subgraph cost-to-go: dimension mismatch");
  }
  const MatrixXd acl = at + bt * k_tilde;
  return linalg::SolveDiscreteLyapunov(
      acl, qc + k_tilde.transpose() * rc * k_tilde);
}

HEstimate AssembleH(const AgentModel& agent, const MatrixXd& qc,
                    const MatrixXd& rc, const MatrixXd& k_tilde, int d) {
  const MatrixXd p = SubgraphCostToGo(agent, qc, rc, k_tilde, d);
  const MatrixXd eye = MatrixXd::Identity(d, d);
  const MatrixXd at = linalg::Kron(eye, agent.a());
  const MatrixXd bt = linalg::Kron(eye, agent.b());
  const auto dn = at.rows();
  const auto dm = bt.cols();
  MatrixXd h(dn + dm, dn + dm);
  h.topLeftCorner(dn, dn) = qc + at.transpose() * p * at;
  h.bottomLeftCorner(dm, dn) = bt.transpose() * p * at;
  h.topRightCorner(dn, dm) = h.bottomLeftCorner(dm, dn).transpose();
  h.bottomRightCorner(dm, dm) = rc + bt.transpose() * p * bt;
  return HEstimate(linalg::Symmetrize(h), d, agent.n(), agent.m());
}

MatrixXd UnstructuredLqr(const AgentModel& agent, const CommGraph& g,
                         const MatrixXd& q1, const MatrixXd& q2,
                         const MatrixXd& r) {
  MakeCompoundCost(g, q1, q2, r);  // validates the weights
  const int nodes = g.node_count();
  const int n = agent.n();
  const int m = agent.m();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Laplacian(g));
  const MatrixXd& v = es.eigenvectors();
  const VectorXd& lambda = es.eigenvalues();
  // Modal gains: y = (V^T (x) I) x decouples into agents with weight
  // Q1 + lambda_i Q2; map back with (V (x) I).
  MatrixXd modal = MatrixXd::Zero(nodes * m, nodes * n);
  for (int i = 0; i < nodes; ++i) {
    const MatrixXd qi = q1 + std::max(0.0, lambda(i)) * q2;
    const MatrixXd p = DareSolve(agent.a(), agent.b(), qi, r);
    modal.block(i * m, i * n, m, n) = DareGain(agent.a(), agent.b(), r, p);
  }
  return linalg::Kron(v, MatrixXd::Identity(m, m)) * modal *
         linalg::Kron(v.transpose(), MatrixXd::Identity(n, n));
}

}  // namespace d3pi::oracle
