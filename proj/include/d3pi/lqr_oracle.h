#pragma once

#include <Eigen/Dense>

#include "d3pi/graph.h"
#include "d3pi/lti_network.h"
#include "d3pi/spe.h"

/// Model-based reference solutions. Used to check the learner and to build
/// baseline controllers; the learner itself never calls into this.
namespace d3pi::oracle {

/// Solves P = Q + A^T P A - A^T P B (R + B^T P B)^-1 B^T P A by fixed-point
/// iteration from P = Q. Stops when the Frobenius change drops below
/// 1e-12 max(1, ||P||_F). Throws NonConvergenceError after 1e5 sweeps.
Eigen::MatrixXd DareSolve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                          const Eigen::MatrixXd& q, const Eigen::MatrixXd& r);

/// -(R + B^T P B)^-1 B^T P A.
Eigen::MatrixXd DareGain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& r, const Eigen::MatrixXd& p);

/// Patterned cost-to-go of the subgraph: P~ = I_d (x) (P1 - P2) + 1 1^T (x) P2.
struct CostToGo {
  Eigen::MatrixXd p1;
  Eigen::MatrixXd p2;
  int d = 0;

  Eigen::MatrixXd dp() const { return p1 - p2; }
  Eigen::MatrixXd tilde() const;
};

struct StructuredSolution {
  Eigen::MatrixXd k;  // diagonal block of K~*
  Eigen::MatrixXd l;  // off-diagonal block
  CostToGo cost;
  /// Dense optimal gain and the projection residuals of K~* and P~.
  Eigen::MatrixXd k_tilde;
  double gain_residual = 0.0;
  double cost_residual = 0.0;

  Eigen::MatrixXd dk() const { return k - l; }
};

/// Optimal LQR gain of the subgraph system (I_d (x) A, I_d (x) B) with the
/// complete-graph cost, factored into its block pattern. Throws
/// StructureError when either projection residual exceeds 1e-6.
StructuredSolution StructuredOptimal(const AgentModel& agent,
                                     const Eigen::MatrixXd& q1,
                                     const Eigen::MatrixXd& q2,
                                     const Eigen::MatrixXd& r, int d);

/// Patterned subgraph gain I_d (x) (K - L) + 1 1^T (x) L.
Eigen::MatrixXd SubgraphGain(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                             int d);

/// trace(P) with P = Acl^T P Acl + Q^ + K^T R^ K, Acl = A^ + B^ K, i.e. the
/// expected cost for identity-covariance initial states. Throws
/// NumericalError when K does not stabilize the network.
double EvaluatePolicyCost(const Eigen::MatrixXd& k_hat, const CommGraph& g,
                          const AgentModel& agent, const Eigen::MatrixXd& q1,
                          const Eigen::MatrixXd& q2, const Eigen::MatrixXd& r);

/// Cost-to-go of a stabilizing patterned subgraph gain.
Eigen::MatrixXd SubgraphCostToGo(const AgentModel& agent,
                                 const Eigen::MatrixXd& qc,
                                 const Eigen::MatrixXd& rc,
                                 const Eigen::MatrixXd& k_tilde, int d);

/// Exact H = [[Qc + A~^T P~ A~, A~^T P~ B~], [B~^T P~ A~, Rc + B~^T P~ B~]]
/// for the policy K~. Throws NumericalError when K~ is not stabilizing.
HEstimate AssembleH(const AgentModel& agent, const Eigen::MatrixXd& qc,
                    const Eigen::MatrixXd& rc, const Eigen::MatrixXd& k_tilde,
                    int d);

/// Centralized LQR gain for the whole network (no sparsity constraint).
/// The Laplacian's eigenbasis decouples the problem into N n-dimensional
/// Riccati equations with state weights Q1 + lambda_i Q2.
Eigen::MatrixXd UnstructuredLqr(const AgentModel& agent, const CommGraph& g,
                                const Eigen::MatrixXd& q1,
                                const Eigen::MatrixXd& q2,
                                const Eigen::MatrixXd& r);

}  // namespace d3pi::oracle
