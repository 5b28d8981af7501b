#include "d3pi/d3pi.h"

#include <gtest/gtest.h>

#include "d3pi/bench.h"
#include "d3pi/errors.h"
#include "d3pi/lqr_oracle.h"
#include "d3pi/patterned.h"
#include "oracles.h"

namespace d3pi {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd S(double v) { return MatrixXd::Constant(1, 1, v); }

AgentModel EngineAgent() {
  const auto e = bench::EngineModel();
  return NormalizeStates(Discretize(e.ac, e.bc, 0.1)).agent;
}

TEST(RecoverBlocksTest, Examples) {
  const BlockSet b = RecoverBlocks(HEstimate(MatrixXd::Identity(4, 4), 2, 1, 1));
  EXPECT_EQ(b.x1, S(1));
  EXPECT_EQ(b.x2, S(0));
  EXPECT_EQ(b.y1, S(1));
  EXPECT_EQ(b.y2, S(0));
  EXPECT_EQ(b.z1, S(0));
  EXPECT_EQ(b.z2, S(0));
  EXPECT_THROW(RecoverBlocks(HEstimate(MatrixXd::Identity(2, 2), 1, 1, 1)),
               DimensionError);
}

TEST(RecoverBlocksTest, InvertsPatternedConstruction) {
  std::mt19937_64 rng(1);
  const int d = 3;
  const MatrixXd x1 = testing::RandomSymmetric(2, rng);
  const MatrixXd x2 = testing::RandomSymmetric(2, rng);
  const MatrixXd y1 = testing::RandomSymmetric(1, rng);
  const MatrixXd y2 = testing::RandomSymmetric(1, rng);
  const MatrixXd z1 = testing::RandomMatrix(1, 2, rng);
  const MatrixXd z2 = testing::RandomMatrix(1, 2, rng);
  MatrixXd h(9, 9);
  h.topLeftCorner(6, 6) = testing::DensePattern(d, x1, x2);
  h.bottomLeftCorner(3, 6) = testing::DensePattern(d, z1, z2);
  h.topRightCorner(6, 3) = h.bottomLeftCorner(3, 6).transpose();
  h.bottomRightCorner(3, 3) = testing::DensePattern(d, y1, y2);
  const BlockSet b = RecoverBlocks(HEstimate(h, d, 2, 1));
  EXPECT_EQ(b.x1, x1);
  EXPECT_EQ(b.x2, x2);
  EXPECT_EQ(b.y1, y1);
  EXPECT_EQ(b.y2, y2);
  EXPECT_EQ(b.z1, z1);
  EXPECT_EQ(b.z2, z2);
}

TEST(RecoverBlocksTest, EngineInputBlockMatchesCostToGo) {
  const AgentModel agent = EngineAgent();
  const MatrixXd i6 = MatrixXd::Identity(6, 6);
  const MatrixXd r = MatrixXd::Identity(2, 2);
  const int d = 3;
  const auto cost = MakeSubgraphCost(d, i6, i6, r);
  const MatrixXd k = oracle::DareGain(agent.a(), agent.b(), 10.0 * r,
                                      oracle::DareSolve(agent.a(), agent.b(), i6, 10.0 * r));
  const MatrixXd kt = oracle::SubgraphGain(k, MatrixXd::Zero(2, 6), d);
  const BlockSet b =
      RecoverBlocks(oracle::AssembleH(agent, cost.q.dense(), cost.r.dense(), kt, d));
  const MatrixXd p = oracle::SubgraphCostToGo(agent, cost.q.dense(), cost.r.dense(), kt, d);
  const MatrixXd p1 = p.topLeftCorner(6, 6);
  const MatrixXd expected = r + agent.b().transpose() * p1 * agent.b();
  EXPECT_LT(testing::RelFro(b.y1, expected), 1e-9);
}

TEST(ComputeFgTest, Examples) {
  const FgPair fg = ComputeFg(S(2), S(1), 3);
  EXPECT_NEAR(fg.f(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(fg.g(0, 0), 0.25, 1e-15);
  const MatrixXd inv = testing::DensePattern(3, S(2), S(1)).inverse();
  EXPECT_NEAR(inv(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(inv(0, 1), -0.25, 1e-15);

  std::mt19937_64 rng(2);
  const MatrixXd y1 = testing::RandomSpd(2, rng);
  const FgPair z = ComputeFg(y1, MatrixXd::Zero(2, 2), 4);
  EXPECT_LT(testing::RelFro(z.f, y1.inverse()), 1e-14);
  EXPECT_EQ(z.g, MatrixXd::Zero(2, 2));

  EXPECT_THROW(ComputeFg(S(1), S(1), 3), NumericalError);
  EXPECT_THROW(ComputeFg(S(1), S(0), 1), DimensionError);
}

TEST(ComputeFgTest, MatchesDenseInverse) {
  std::mt19937_64 rng(3);
  const int d = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd y1 = testing::RandomSpd(2, rng, 4.0);
    const MatrixXd y2 = 0.3 * testing::RandomSymmetric(2, rng);
    const MatrixXd dense = testing::DensePattern(d, y1, y2);
    if (testing::MinEig(dense) <= 0.0) continue;
    const FgPair fg = ComputeFg(y1, y2, d);
    const MatrixXd expected = dense.inverse();
    EXPECT_LT((testing::DensePattern(d, fg.f, -fg.g) - expected).norm(),
              1e-9 * expected.norm());
  }
}

TEST(UpdateGainsTest, Examples) {
  const GainPair g = UpdateGains({S(0.75), S(0.25)}, S(1), S(0), 3);
  EXPECT_NEAR(g.k(0, 0), -0.75, 1e-15);
  EXPECT_NEAR(g.l(0, 0), 0.25, 1e-15);
  const GainPair z = UpdateGains({S(0.75), S(0.25)}, S(0), S(0), 3);
  EXPECT_EQ(z.k, S(0));
  EXPECT_EQ(z.l, S(0));
}

TEST(UpdateGainsTest, MatchesDenseGreedyGain) {
  std::mt19937_64 rng(4);
  const int d = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd y1 = testing::RandomSpd(2, rng, 4.0);
    const MatrixXd y2 = 0.3 * testing::RandomSymmetric(2, rng);
    const MatrixXd h22 = testing::DensePattern(d, y1, y2);
    if (testing::MinEig(h22) <= 0.0) continue;
    const MatrixXd z1 = testing::RandomMatrix(2, 3, rng);
    const MatrixXd z2 = testing::RandomMatrix(2, 3, rng);
    const MatrixXd h21 = testing::DensePattern(d, z1, z2);
    const MatrixXd dense = -h22.inverse() * h21;
    const GainPair g = UpdateGains(ComputeFg(y1, y2, d), z1, z2, d);
    EXPECT_LT((testing::DensePattern(d, g.k, g.l) - dense).norm(), 1e-9 * dense.norm());
  }
}

TEST(ComputeXiTest, Examples) {
  BlockSet zero{S(0), S(0), S(0), S(0), S(0), S(0)};
  EXPECT_EQ(ComputeXi(zero, S(0), S(2), S(2), S(1)), S(0));
  // dY - R = -R here, so a nonzero dK contributes -dK^T R dK.
  EXPECT_NEAR(ComputeXi(zero, S(0.3), S(2), S(2), S(1))(0, 0), -0.09, 1e-15);

  std::mt19937_64 rng(5);
  BlockSet b;
  b.x1 = testing::RandomSymmetric(2, rng);
  b.x2 = testing::RandomSymmetric(2, rng);
  b.y1 = testing::RandomSpd(1, rng);
  b.y2 = S(0.1);
  b.z1 = testing::RandomMatrix(1, 2, rng);
  b.z2 = testing::RandomMatrix(1, 2, rng);
  const MatrixXd qt = testing::RandomSpd(2, rng);
  const MatrixXd q2 = testing::RandomSpd(2, rng);
  const MatrixXd xi = ComputeXi(b, MatrixXd::Zero(1, 2), qt, q2, S(1));
  EXPECT_LT((xi - (b.dx() - qt + q2)).norm(), 1e-14);
  const MatrixXd proof =
      ComputeXi(b, MatrixXd::Zero(1, 2), qt, q2, S(1), XiVariant::kProof);
  EXPECT_LT((xi - proof - q2).norm(), 1e-14);
}

// From model-based blocks, Xi collapses to A_dK^T dP A_dK (+ Q2 in the
// algorithm variant), for any dK.
TEST(ComputeXiTest, ModelBasedIdentityOnEngine) {
  const AgentModel agent = EngineAgent();
  const MatrixXd i6 = MatrixXd::Identity(6, 6);
  const MatrixXd q2 = 0.5 * i6;
  const MatrixXd r = MatrixXd::Identity(2, 2);
  const int d = 3;
  const auto cost = MakeSubgraphCost(d, i6, q2, r);
  const MatrixXd k = oracle::DareGain(agent.a(), agent.b(), 10.0 * r,
                                      oracle::DareSolve(agent.a(), agent.b(), i6, 10.0 * r));
  std::mt19937_64 rng(6);
  const MatrixXd l = 0.01 * testing::RandomMatrix(2, 6, rng);
  const MatrixXd kt = oracle::SubgraphGain(k, l, d);
  const BlockSet b =
      RecoverBlocks(oracle::AssembleH(agent, cost.q.dense(), cost.r.dense(), kt, d));
  const MatrixXd p = oracle::SubgraphCostToGo(agent, cost.q.dense(), cost.r.dense(), kt, d);
  const MatrixXd dp = p.block(0, 0, 6, 6) - p.block(0, 6, 6, 6);
  for (int trial = 0; trial < 3; ++trial) {
    const MatrixXd dk = k + 0.1 * testing::RandomMatrix(2, 6, rng);
    const MatrixXd acl = agent.a() + agent.b() * dk;
    const MatrixXd core = acl.transpose() * dp * acl;
    EXPECT_LT(testing::RelFro(ComputeXi(b, dk, cost.q_tilde, q2, r), core + q2), 1e-8);
    EXPECT_LT(testing::RelFro(ComputeXi(b, dk, cost.q_tilde, q2, r, XiVariant::kProof),
                              core),
              1e-8);
  }
}

TEST(MarginTest, TauFormula) {
  EXPECT_NEAR(TauFromGamma(1.0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(TauFromGamma(3.0), 1.5, 1e-15);
  EXPECT_EQ(TauFromGamma(0.0), 0.0);
  for (double g : {0.01, 0.5, 2.0, 100.0}) EXPECT_LT(TauFromGamma(g), g);
}

TEST(MarginTest, DegenerateDenominator) {
  const Margin m = ComputeMargin(S(0), S(0), S(0), S(1), S(1), S(1));
  EXPECT_TRUE(m.degenerate);
  EXPECT_EQ(m.tau, 0.0);
}

TEST(MarginTest, ScalarCrossCheckAtOptimum) {
  const AgentModel agent(S(0.5), S(1));
  const int d = 2;
  const MatrixXd q1 = S(1.0 / 3.0);
  const MatrixXd q2 = S(1.0 / 3.0);
  const MatrixXd r = S(1);
  const auto cost = MakeSubgraphCost(d, q1, q2, r);
  ASSERT_NEAR(cost.q_tilde(0, 0), 1.0, 1e-15);
  const auto opt = oracle::StructuredOptimal(agent, q1, q2, r, d);
  const BlockSet b = RecoverBlocks(
      oracle::AssembleH(agent, cost.q.dense(), cost.r.dense(), opt.k_tilde, d));
  const double dk = opt.dk()(0, 0);
  const double l = opt.l(0, 0);
  const MatrixXd xi = ComputeXi(b, opt.dk(), cost.q_tilde, q2, r);
  const Margin m = ComputeMargin(xi, opt.dk(), opt.l, b.dy(), r, cost.q_tilde);

  const double dp = opt.cost.dp()(0, 0);
  const double xi_direct = (0.5 + dk) * (0.5 + dk) * dp + 1.0 / 3.0;
  EXPECT_NEAR(xi(0, 0), xi_direct, 1e-9);
  const double dy = 1.0 + dp;
  const double gamma = (dk * dk + 1.0) / std::abs(xi_direct + l * l * (dy - 1.0));
  EXPECT_NEAR(m.gamma, gamma, 1e-9 * gamma);
  EXPECT_NEAR(m.tau, std::sqrt(gamma * gamma / (1.0 + gamma)), 1e-9);
  EXPECT_FALSE(m.degenerate);
}

D3piConfig ScalarConfig() {
  D3piConfig cfg;
  cfg.q1 = S(1);
  cfg.q2 = S(1);
  cfg.r = S(1);
  cfg.k1 = S(0);
  cfg.spe.beta = 1e10;
  cfg.spe.noise_variance = 1.0;
  cfg.seed = 17;
  return cfg;
}

NetworkSimulator ScalarSim(int nodes, std::uint64_t seed) {
  return NetworkSimulator(CompoundSystem(AgentModel(S(0.9), S(1)), nodes),
                          NetworkState{0, bench::InitialState(nodes, 1, seed)});
}

TEST(RunD3piTest, ConvergesToStructuredOptimum) {
  const CommGraph g = CommGraph::Path(5);
  NetworkSimulator sim = ScalarSim(5, 1);
  const D3piConfig cfg = ScalarConfig();
  const D3piResult res = RunD3pi(sim, g, cfg);
  const auto opt = oracle::StructuredOptimal(AgentModel(S(0.9), S(1)), S(1), S(1), S(1), 3);
  ASSERT_TRUE(res.converged);
  EXPECT_EQ(res.selection.size(), 3);
  EXPECT_NEAR(res.k(0, 0), opt.k(0, 0), 1e-2 * std::abs(opt.k(0, 0)));
  EXPECT_NEAR(res.l(0, 0), opt.l(0, 0), 1e-2 * std::max(std::abs(opt.l(0, 0)), 1e-2));
  EXPECT_LT(testing::RelFro(oracle::SubgraphGain(res.k, res.l, 3), opt.k_tilde), 1e-2);
  EXPECT_EQ(sim.policy(), res.final_policy);
  EXPECT_TRUE(IsSparsityMember(res.final_policy, g, 1, 1, 0.0));
  EXPECT_EQ(static_cast<int>(res.history.size()), res.history.back().k);
}

TEST(RunD3piTest, PerIterationProperties) {
  const CommGraph g = CommGraph::Path(5);
  NetworkSimulator sim = ScalarSim(5, 2);
  const D3piResult res = RunD3pi(sim, g, ScalarConfig());
  const AgentModel agent(S(0.9), S(1));
  const auto cost = MakeSubgraphCost(3, S(1), S(1), S(1));
  const MatrixXd a3 = 0.9 * MatrixXd::Identity(3, 3);
  double last_trace = std::numeric_limits<double>::infinity();
  for (const GainState& s : res.history) {
    const MatrixXd kt = oracle::SubgraphGain(s.k_gain, s.l_gain, 3);
    EXPECT_LT(testing::SpectralRadius(a3 + kt), 1.0) << "iteration " << s.k;
    const double tr = oracle::SubgraphCostToGo(agent, cost.q.dense(), cost.r.dense(), kt, 3)
                          .trace();
    EXPECT_LE(tr, last_trace * (1.0 + 1e-6)) << "iteration " << s.k;
    last_trace = tr;
    if (s.k > 1) {
      EXPECT_GE(s.tau, 0.0);
      EXPECT_LT(s.tau, s.gamma);
    }
  }
}

TEST(RunD3piTest, OptimalInitializationIsAFixedPoint) {
  const auto opt = oracle::StructuredOptimal(AgentModel(S(0.9), S(1)), S(1), S(1), S(1), 3);
  D3piConfig cfg = ScalarConfig();
  cfg.k1 = opt.k;
  cfg.l1 = opt.l;
  NetworkSimulator sim = ScalarSim(5, 3);
  const D3piResult res = RunD3pi(sim, CommGraph::Path(5), cfg);
  EXPECT_LE(res.history.back().k - 1, 2);
  EXPECT_LT((res.k - opt.k).norm(), 1e-3);
  EXPECT_LT((res.l - opt.l).norm(), 1e-3);
}

TEST(RunD3piTest, DeterministicAndErrors) {
  const CommGraph g = CommGraph::Path(4);
  NetworkSimulator a = ScalarSim(4, 4);
  NetworkSimulator b = ScalarSim(4, 4);
  const D3piResult ra = RunD3pi(a, g, ScalarConfig());
  const D3piResult rb = RunD3pi(b, g, ScalarConfig());
  EXPECT_EQ(ra.k, rb.k);
  EXPECT_EQ(ra.l, rb.l);
  EXPECT_EQ(ra.total_steps, rb.total_steps);
  EXPECT_EQ(a.state().x, b.state().x);

  D3piConfig bad = ScalarConfig();
  bad.k1 = MatrixXd::Zero(1, 2);
  NetworkSimulator c = ScalarSim(4, 4);
  EXPECT_THROW(RunD3pi(c, g, bad), DimensionError);
  NetworkSimulator e = ScalarSim(3, 4);
  EXPECT_THROW(RunD3pi(e, CommGraph::Edgeless(3), ScalarConfig()), DimensionError);
  D3piConfig tight = ScalarConfig();
  tight.max_iter = 1;
  tight.tol = 0.0;
  NetworkSimulator f = ScalarSim(4, 4);
  EXPECT_THROW(RunD3pi(f, g, tight), NonConvergenceError);
}

TEST(RunD3piTest, UncoordinatedRestUsesSelfFeedback) {
  const CommGraph g = CommGraph::Path(5);
  D3piConfig cfg = ScalarConfig();
  cfg.coordinate_rest = false;
  cfg.k1 = S(-0.1);
  GainState s;
  s.k_gain = S(-0.3);
  s.l_gain = S(0.1);
  s.tau = 0.5;
  const auto sel = SelectSubgraph(g);
  const MatrixXd gain = LearningPolicy(s, g, sel, cfg);
  EXPECT_EQ(gain.row(3), (VectorXd(5) << 0, 0, 0, -0.1, 0).finished().transpose());
  EXPECT_EQ(gain.row(4), (VectorXd(5) << 0, 0, 0, 0, -0.1).finished().transpose());
  EXPECT_EQ(gain.topRows(3), BuildPolicyLearning(s.k_gain, s.l_gain, 0.5, g, sel).topRows(3));
  NetworkSimulator sim = ScalarSim(5, 5);
  const D3piResult res = RunD3pi(sim, g, cfg);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.final_policy, BuildPolicyFinal(res.k, res.l, res.tau, g));
}

}  // namespace
}  // namespace d3pi
