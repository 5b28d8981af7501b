#include "d3pi/bench.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "d3pi/errors.h"
#include "d3pi/lqr_oracle.h"
#include "oracles.h"

namespace d3pi::bench {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("d3pi_bench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

RunConfig Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseConfig(in);
}

TEST(EngineModelTest, TranscribedEntries) {
  const ContinuousModel e = EngineModel();
  ASSERT_EQ(e.ac.rows(), 6);
  ASSERT_EQ(e.bc.cols(), 2);
  EXPECT_EQ(e.ac(0, 0), -0.4125);
  EXPECT_EQ(e.bc(5, 1), -0.0075);
  EXPECT_EQ(e.ac(5, 3), -359.0);
}

TEST(ConfigTest, DefaultsAndOverrides) {
  const RunConfig def = Parse("");
  EXPECT_EQ(def.agent_source, "engine");
  EXPECT_EQ(def.nodes, 10);
  EXPECT_EQ(def.variant, Variant::kD3piOn);
  const RunConfig c = Parse(
      "# comment\n[graph]\ntype = star\nnodes = 6\n[run]\nseed = 9\n"
      "variant = d3pi_off\n[spe]\nsigma = 0.5\n[d3pi]\nxi_variant = proof\n");
  EXPECT_EQ(c.graph_type, "star");
  EXPECT_EQ(c.nodes, 6);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.variant, Variant::kD3piOff);
  EXPECT_EQ(c.sigma, 0.5);
  EXPECT_EQ(c.xi_variant, XiVariant::kProof);

  std::ostringstream echo;
  WriteConfig(c, echo);
  const RunConfig again = Parse(echo.str());
  std::ostringstream echo2;
  WriteConfig(again, echo2);
  EXPECT_EQ(echo.str(), echo2.str());
}

TEST(ConfigTest, Errors) {
  EXPECT_THROW(Parse("[graph]\ncolour = red\n"), ConfigError);
  EXPECT_THROW(Parse("[nope]\nx = 1\n"), ConfigError);
  EXPECT_THROW(Parse("[graph]\nnodes = ten\n"), ConfigError);
  EXPECT_THROW(Parse("[run]\nvariant = fastest\n"), ConfigError);
  EXPECT_THROW(Parse("[agent]\nnormalize = maybe\n"), ConfigError);
  EXPECT_THROW(Parse("[graph]\nnodes\n"), ConfigError);
  EXPECT_THROW(LoadConfig("/nonexistent/run.ini"), ConfigError);
  EXPECT_THROW(ParseVariant("x"), ConfigError);
  EXPECT_EQ(ParseVariant("lqr_baseline"), Variant::kLqrBaseline);
  EXPECT_STREQ(VariantName(Variant::kD3piOff), "d3pi_off");
}

TEST(ConfigTest, MatrixSpecs) {
  EXPECT_EQ(ParseMatrixSpec("2", 3), 2.0 * MatrixXd::Identity(3, 3));
  EXPECT_EQ(ParseMatrixSpec("1,2;2,5", 2), (MatrixXd(2, 2) << 1, 2, 2, 5).finished());
  EXPECT_THROW(ParseMatrixSpec("1,2;3", 2), ConfigError);
  EXPECT_THROW(ParseMatrixSpec("1,2;3,4", 3), ConfigError);
  EXPECT_THROW(ParseMatrixSpec("abc", 2), ConfigError);
  RunConfig bad = Parse("[cost]\nr = -1\n");
  EXPECT_THROW(BuildScenario(bad), ConfigError);
}

TEST(ParseRangeTest, Forms) {
  EXPECT_EQ(ParseRange("5..8"), (std::vector<int>{5, 6, 7, 8}));
  EXPECT_EQ(ParseRange("5,7"), (std::vector<int>{5, 7}));
  EXPECT_EQ(ParseRange("7"), (std::vector<int>{7}));
  EXPECT_THROW(ParseRange("8..5"), ConfigError);
  EXPECT_THROW(ParseRange(""), ConfigError);
  EXPECT_THROW(ParseRange("0"), ConfigError);
}

TEST(InitialStateTest, PrefixStableAcrossSizes) {
  const auto a = InitialState(5, 6, 3);
  const auto b = InitialState(30, 6, 3);
  EXPECT_EQ(a, b.head(30));
  EXPECT_LE(b.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_NE(InitialState(5, 6, 4), a);
}

// Scalar agent without coupling: the realized cost under the LQR gain is a
// geometric series in x0.
TEST(RunBenchmarkTest, ScalarBaselineClosedForm) {
  const fs::path dir = TempDir("scalar");
  std::ofstream(dir / "a.txt") << "1.2\n";
  std::ofstream(dir / "b.txt") << "1\n";
  RunConfig c = Parse(
      "[agent]\nsource = file\na_file = a.txt\nb_file = b.txt\ncontinuous = false\n"
      "normalize = false\n[graph]\ntype = edgeless\nnodes = 1\n"
      "[run]\nvariant = lqr_baseline\nhorizon = 40\n");
  c.base_dir = dir.string();
  c.out = (dir / "out").string();
  const RunSummary s = RunBenchmark(c, true);
  const MatrixXd one = MatrixXd::Ones(1, 1);
  const double p = oracle::DareSolve(1.2 * one, one, one, one)(0, 0);
  const double k = -1.2 * p / (1.0 + p);
  const double rho = 1.2 + k;
  const double x0 = InitialState(1, 1, 1)(0);
  double expected = 0.0;
  double x = x0;
  for (int t = 0; t < 40; ++t) {
    expected += (1.0 + k * k) * x * x;
    x *= rho;
  }
  EXPECT_NEAR(s.cost, expected, 1e-12 * expected);
  // Infinite-horizon limit is p x0^2.
  EXPECT_NEAR(s.cost, p * x0 * x0, 1e-9 * expected);
  EXPECT_EQ(s.steps, 40);
  EXPECT_TRUE(fs::exists(dir / "out" / "states.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "costs.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "meta.txt"));
  EXPECT_FALSE(fs::exists(dir / "out" / "gains.csv"));
}

RunConfig SmallEngine(const fs::path& out) {
  RunConfig c = Parse("[graph]\nnodes = 5\n[run]\nhorizon = 4000\n");
  c.out = out.string();
  return c;
}

TEST(RunBenchmarkTest, EngineByteIdenticalOutputs) {
  const fs::path a = TempDir("det_a");
  const fs::path b = TempDir("det_b");
  const RunSummary sa = RunBenchmark(SmallEngine(a), true);
  const RunSummary sb = RunBenchmark(SmallEngine(b), true);
  EXPECT_TRUE(sa.converged);
  for (const char* f : {"states.csv", "costs.csv", "gains.csv"}) {
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
    EXPECT_FALSE(Slurp(a / f).empty()) << f;
  }
  // meta.txt echoes the output directory, so compare only the results.
  const std::string ma = Slurp(a / "meta.txt");
  const std::string mb = Slurp(b / "meta.txt");
  EXPECT_EQ(ma.substr(ma.find("[result]")), mb.substr(mb.find("[result]")));
  EXPECT_EQ(sa.cost, sb.cost);
}

TEST(RunBenchmarkTest, EngineOrderingAndStructure) {
  RunConfig c = SmallEngine(TempDir("order"));
  c.variant = Variant::kLqrBaseline;
  const RunSummary base = RunBenchmark(c, false);
  c.variant = Variant::kD3piOn;
  const RunSummary on = RunBenchmark(c, false);
  EXPECT_TRUE(on.converged);
  EXPECT_LE(base.policy_cost, on.policy_cost);
  EXPECT_LE(base.cost, on.cost);
  const Scenario s = BuildScenario(c);
  EXPECT_TRUE(IsSparsityMember(on.final_policy, s.graph, 2, 6, 0.0));
  EXPECT_EQ(on.final_policy, BuildPolicyFinal(on.k, on.l, on.tau, s.graph));
  EXPECT_EQ(static_cast<std::int64_t>(on.cost_curve.size()), on.steps);
}

TEST(SweepAgentsTest, SingleSizeMatchesSingleRun) {
  RunConfig c = SmallEngine(TempDir("sweep"));
  std::ostringstream summary;
  const auto rows = SweepAgents(c, {5}, summary);
  ASSERT_EQ(rows.size(), 1u);
  c.variant = Variant::kD3piOn;
  const RunSummary on = RunBenchmark(c, false);
  EXPECT_EQ(rows[0][1].cost, on.cost);
  c.variant = Variant::kD3piOff;
  EXPECT_EQ(rows[0][2].cost, RunBenchmark(c, false).cost);
  c.variant = Variant::kLqrBaseline;
  EXPECT_EQ(rows[0][0].cost, RunBenchmark(c, false).cost);
  const std::string text = summary.str();
  EXPECT_EQ(text.rfind("nodes,cost_lqr_baseline,cost_d3pi_on,cost_d3pi_off,", 0), 0u);
  EXPECT_NE(text.find("\n5,"), std::string::npos);
}

TEST(SelfTestTest, AllChecksPass) {
  std::ostringstream out;
  EXPECT_TRUE(RunSelfTest(out)) << out.str();
}

}  // namespace
}  // namespace d3pi::bench
