#include <cmath>
#include <random>

#include "d3pi/bench.h"
#include "d3pi/d3pi.h"
#include "d3pi/errors.h"
#include "d3pi/linalg.h"
#include "d3pi/lqr_oracle.h"
#include "d3pi/patterned.h"

namespace d3pi::bench {

using Eigen::MatrixXd;

namespace {

MatrixXd RandomSymmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXd m(n, n);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return linalg::Symmetrize(m);
}

double RelErr(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

bool PatternedChecks() {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 2 + trial % 5;
    const int n = 1 + trial % 4;
    const MatrixXd a =
        RandomSymmetric(n, rng) + (2.0 * r) * MatrixXd::Identity(n, n);
    const MatrixXd b = RandomSymmetric(n, rng) * 0.5;
    const PatternedMatrix p = patterned::MakePatterned(r, a, b);
    const MatrixXd dense = p.dense();
    const double det = dense.determinant();
    if (std::abs(patterned::Determinant(p) - det) > 1e-9 * std::abs(det)) {
      return false;
    }
    if (RelErr(patterned::Inverse(p).dense(), dense.inverse()) > 1e-8) {
      return false;
    }
    if (RelErr(patterned::Multiply(p, p).dense(), dense * dense) > 1e-10) {
      return false;
    }
    const bool pd = linalg::MinEigenvalue(dense) > 0.0;
    if (patterned::IsPositiveDefinite(p) != pd) return false;
    const PatternedMatrix acl =
        patterned::MakePatterned(r, 0.3 * MatrixXd::Identity(n, n),
                                 (0.1 / r) * MatrixXd::Identity(n, n));
    const PatternedMatrix q =
        patterned::MakePatterned(r, MatrixXd::Identity(n, n), 0.2 * b / r);
    if (!patterned::IsPositiveDefinite(q)) continue;
    const MatrixXd pl = patterned::SolveLyapunov(acl, q).dense();
    const MatrixXd res =
        acl.dense().transpose() * pl * acl.dense() + q.dense() - pl;
    if (res.norm() > 1e-9 * pl.norm()) return false;
  }
  return true;
}

bool DareCheck() {
  const MatrixXd one = MatrixXd::Ones(1, 1);
  const MatrixXd p = oracle::DareSolve(one, one, one, one);
  return std::abs(p(0, 0) - (1.0 + std::sqrt(5.0)) / 2.0) < 1e-9;
}

bool ShadowCheck() {
  const AgentModel agent(MatrixXd::Constant(1, 1, 0.9),
                         MatrixXd::Ones(1, 1));
  const MatrixXd q1 = MatrixXd::Ones(1, 1);
  const int d = 3;
  const auto opt = oracle::StructuredOptimal(agent, q1, q1, q1, d);
  const SubgraphCost cost = MakeSubgraphCost(d, q1, q1, q1);
  MatrixXd k = MatrixXd::Zero(1, 1);
  MatrixXd l = MatrixXd::Zero(1, 1);
  for (int sweep = 0; sweep < 60; ++sweep) {
    const HEstimate h =
        oracle::AssembleH(agent, cost.q.dense(), cost.r.dense(),
                          oracle::SubgraphGain(k, l, d), d);
    const BlockSet b = RecoverBlocks(h);
    const GainPair next = UpdateGains(ComputeFg(b.y1, b.y2, d), b.z1, b.z2, d);
    k = next.k;
    l = next.l;
  }
  return (k - opt.k).norm() < 1e-8 && (l - opt.l).norm() < 1e-8;
}

bool SpeCheck() {
  const AgentModel agent(MatrixXd::Constant(1, 1, 0.5), MatrixXd::Ones(1, 1));
  const MatrixXd one = MatrixXd::Ones(1, 1);
  const int d = 2;
  const CommGraph g = CommGraph::Path(2);
  const SubgraphSelection sel = SelectSubgraph(g);
  const SubgraphCost cost = MakeSubgraphCost(d, one, one, one);
  const MatrixXd k = MatrixXd::Constant(1, 1, -0.2);
  const MatrixXd l = MatrixXd::Constant(1, 1, 0.05);
  NetworkSimulator sim(CompoundSystem(agent, 2),
                       NetworkState{0, InitialState(2, 1, 3)});
  sim.set_policy(BuildPolicyLearning(k, l, 0.0, g, sel));
  std::mt19937_64 rng(11);
  const HEstimate prev(MatrixXd::Zero(4, 4), d, 1, 1);
  // The default 0.01 I exploration leaves a visible prior bias within the
  // default budget on this 4-unknown problem; unit variance does not.
  SpeConfig spe;
  spe.noise_variance = 1.0;
  const SpeResult res =
      RunSpe(sim, sel, cost.q.dense(), cost.r.dense(), prev, spe, rng);
  const HEstimate exact = oracle::AssembleH(
      agent, cost.q.dense(), cost.r.dense(), oracle::SubgraphGain(k, l, d), d);
  return res.converged && (res.estimate.h - exact.h).norm() <= 1e-3;
}

}  // namespace

bool RunSelfTest(std::ostream& out) {
  struct Check {
    const char* name;
    bool (*fn)();
  };
  const Check checks[] = {
      {"patterned algebra vs dense", PatternedChecks},
      {"riccati scalar golden ratio", DareCheck},
      {"model-based policy iteration fixed point", ShadowCheck},
      {"subgraph policy evaluation vs exact H", SpeCheck},
  };
  bool ok = true;
  for (const Check& c : checks) {
    bool pass = false;
    try {
      pass = c.fn();
    } catch (const Error& e) {
      out << "error in " << c.name << ": " << e.what() << "\n";
    }
    out << (pass ? "PASS " : "FAIL ") << c.name << "\n";
    ok = ok && pass;
  }
  return ok;
}

}  // namespace d3pi::bench
