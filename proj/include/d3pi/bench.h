#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d3pi/d3pi.h"
#include "d3pi/graph.h"
#include "d3pi/lti_network.h"

namespace d3pi::bench {

/// Continuous-time turbocharged diesel engine with exhaust gas
/// recirculation: 6 states, 2 inputs.
struct ContinuousModel {
  Eigen::MatrixXd ac;
  Eigen::MatrixXd bc;
};
ContinuousModel EngineModel();

enum class Variant { kD3piOn, kD3piOff, kLqrBaseline };

const char* VariantName(Variant v);
/// Accepts d3pi_on, d3pi_off, lqr_baseline. Throws ConfigError.
Variant ParseVariant(const std::string& s);

/// Flat key=value configuration grouped by [section] headers. Every field
/// has a default, so an empty file is a valid engine run.
struct RunConfig {
  // [agent]
  std::string agent_source = "engine";  // engine | file
  std::string a_file;
  std::string b_file;
  /// File matrices are continuous-time and discretized with dt when set.
  bool continuous = true;
  double dt = 0.1;
  bool normalize = true;

  // [graph]
  std::string graph_type = "path";  // path | star | complete | edgeless | file
  int nodes = 10;
  std::string graph_file;

  // [cost] scalar s means s * I, otherwise rows "a,b;c,d".
  std::string q1 = "1";
  std::string q2 = "1";
  std::string r = "1";

  // [run]
  std::uint64_t seed = 1;
  Variant variant = Variant::kD3piOn;
  std::int64_t horizon = 5000;
  std::string out = "out";
  bool write_states = true;

  // [spe]
  double beta = 1e10;
  double sigma = 1.0;
  double spe_tol = 1e-6;
  int window = 10;
  std::int64_t max_steps = 0;
  bool project = true;
  bool literal_regressor = false;

  // [d3pi]
  double tol = 1e-4;
  int max_iter = 50;
  XiVariant xi_variant = XiVariant::kAlgorithm;
  /// K1 is the LQR gain of one agent with input weight k1_r_scale * R.
  double k1_r_scale = 10.0;

  /// Directory relative file paths are resolved against.
  std::string base_dir = ".";
};

/// Throws ConfigError on unknown sections/keys or malformed values.
RunConfig ParseConfig(std::istream& in, const std::string& base_dir = ".");
RunConfig LoadConfig(const std::string& path);
/// Echoes the effective configuration in the same format ParseConfig reads.
void WriteConfig(const RunConfig& cfg, std::ostream& out);

/// Parses "s" (s * I_dim) or "a,b;c,d". Throws ConfigError.
Eigen::MatrixXd ParseMatrixSpec(const std::string& spec, int dim);

/// Whitespace-separated rows. Throws ConfigError.
Eigen::MatrixXd LoadMatrix(const std::string& path);

struct Scenario {
  AgentModel agent;
  /// Physical state = scale .* simulated state; all ones without
  /// normalization.
  Eigen::VectorXd scale;
  CommGraph graph;
  Eigen::MatrixXd q1, q2, r;
  double rho_a = 0.0;
};
Scenario BuildScenario(const RunConfig& cfg);

/// Stabilizing initial gain from the single-agent Riccati equation with an
/// inflated input weight. Uses the model for initialization only.
Eigen::MatrixXd InitialGain(const Scenario& s, double r_scale);

/// Agent-major uniform [-1, 1] draw, so prefixes agree across network sizes.
Eigen::VectorXd InitialState(int agents, int n, std::uint64_t seed);

struct RunSummary {
  Variant variant = Variant::kD3piOn;
  int nodes = 0;
  std::int64_t steps = 0;
  /// Cumulative sum of x^T Q^ x + u^T R^ u over the horizon.
  double cost = 0.0;
  /// Part of `cost` charged to agents outside the learning subgraph.
  double rest_cost = 0.0;
  /// trace of the closed-loop Lyapunov solution of the final policy.
  double policy_cost = 0.0;
  bool converged = true;
  int iterations = 0;
  std::int64_t learning_steps = 0;
  double spe_seconds = 0.0;
  double tau = 0.0;
  double gamma = 0.0;
  Eigen::MatrixXd k;
  Eigen::MatrixXd l;
  Eigen::MatrixXd final_policy;
  std::vector<double> cost_curve;  // cumulative cost after each step
};

/// Runs one variant. When `write_files` is set, writes states.csv,
/// costs.csv, gains.csv (learning variants) and meta.txt into cfg.out.
/// Errors propagate as d3pi exceptions.
RunSummary RunBenchmark(const RunConfig& cfg, bool write_files = true);

/// Runs all three variants for every network size and writes one row per
/// size: nodes, three final costs, SPE wall-clock and steps.
std::vector<std::vector<RunSummary>> SweepAgents(const RunConfig& cfg,
                                                 const std::vector<int>& sizes,
                                                 std::ostream& summary);

/// Parses "5..30", "5,6,8" or "7". Throws ConfigError.
std::vector<int> ParseRange(const std::string& s);

/// Quick oracle-equivalence checks; prints one line per check and returns
/// true when all pass.
bool RunSelfTest(std::ostream& out);

}  // namespace d3pi::bench
