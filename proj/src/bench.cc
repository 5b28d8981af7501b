#include "d3pi/bench.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "d3pi/csv.h"
#include "d3pi/errors.h"
#include "d3pi/linalg.h"
#include "d3pi/lqr_oracle.h"

namespace d3pi::bench {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ContinuousModel EngineModel() {
  ContinuousModel m;
  m.ac.resize(6, 6);
  m.ac << -0.4125, -0.0248, 0.0741, 0.0089, 0.0000, 0.0000,  //
      101.5873, -7.2651, 2.7608, 2.8068, 0.0000, 0.0000,     //
      0.0704, 0.0085, -0.0741, -0.0089, 0.0000, 0.0200,      //
      0.0878, 0.2672, 0.0000, -0.3674, 0.0044, 0.3962,       //
      -1.8414, 0.0990, 0.0000, 0.0000, -0.0343, -0.0330,     //
      0.0000, 0.0000, 0.0000, -359.0000, 187.5364, -87.0316;
  m.bc.resize(6, 2);
  m.bc << -0.0003, 0.0005,  //
      -0.0764, 0.1149,      //
      0.0004, 0.0000,       //
      -0.0127, 0.0016,      //
      -0.0005, -0.0011,     //
      0.0456, -0.0075;
  return m;
}

const char* VariantName(Variant v) {
  switch (v) {
    case Variant::kD3piOn:
      return "d3pi_on";
    case Variant::kD3piOff:
      return "d3pi_off";
    case Variant::kLqrBaseline:
      return "lqr_baseline";
  }
  return "?";
}

Variant ParseVariant(const std::string& s) {
  if (s == "d3pi_on") return Variant::kD3piOn;
  if (s == "d3pi_off") return Variant::kD3piOff;
  if (s == "lqr_baseline") return Variant::kLqrBaseline;
  throw ConfigError("unknown variant '" + s + "'");
}

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
}

std::int64_t ToInt(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
}

std::uint64_t ToUnsigned(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long x = std::stoull(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "': expected an unsigned integer, got '" + v +
                    "'");
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("'" + key + "': expected true/false, got '" + v + "'");
}

std::string Resolve(const std::string& base, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = {
      {"agent.source",
       [](RunConfig& c, const std::string& v) {
         if (v != "engine" && v != "file") {
           throw ConfigError("agent.source must be engine or file");
         }
         c.agent_source = v;
       }},
      {"agent.a_file", [](RunConfig& c, const std::string& v) { c.a_file = v; }},
      {"agent.b_file", [](RunConfig& c, const std::string& v) { c.b_file = v; }},
      {"agent.continuous",
       [](RunConfig& c, const std::string& v) {
         c.continuous = ToBool("continuous", v);
       }},
      {"agent.dt",
       [](RunConfig& c, const std::string& v) { c.dt = ToDouble("dt", v); }},
      {"agent.normalize",
       [](RunConfig& c, const std::string& v) {
         c.normalize = ToBool("normalize", v);
       }},
      {"graph.type",
       [](RunConfig& c, const std::string& v) {
         static const char* kTypes[] = {"path", "star", "complete", "edgeless",
                                        "file"};
         if (std::find(std::begin(kTypes), std::end(kTypes), v) ==
             std::end(kTypes)) {
           throw ConfigError("unknown graph type '" + v + "'");
         }
         c.graph_type = v;
       }},
      {"graph.nodes",
       [](RunConfig& c, const std::string& v) {
         c.nodes = static_cast<int>(ToInt("nodes", v));
       }},
      {"graph.file",
       [](RunConfig& c, const std::string& v) { c.graph_file = v; }},
      {"cost.q1", [](RunConfig& c, const std::string& v) { c.q1 = v; }},
      {"cost.q2", [](RunConfig& c, const std::string& v) { c.q2 = v; }},
      {"cost.r", [](RunConfig& c, const std::string& v) { c.r = v; }},
      {"run.seed",
       [](RunConfig& c, const std::string& v) { c.seed = ToUnsigned("seed", v); }},
      {"run.variant",
       [](RunConfig& c, const std::string& v) { c.variant = ParseVariant(v); }},
      {"run.horizon",
       [](RunConfig& c, const std::string& v) {
         c.horizon = ToInt("horizon", v);
       }},
      {"run.out", [](RunConfig& c, const std::string& v) { c.out = v; }},
      {"run.write_states",
       [](RunConfig& c, const std::string& v) {
         c.write_states = ToBool("write_states", v);
       }},
      {"spe.beta",
       [](RunConfig& c, const std::string& v) { c.beta = ToDouble("beta", v); }},
      {"spe.sigma",
       [](RunConfig& c, const std::string& v) {
         c.sigma = ToDouble("sigma", v);
       }},
      {"spe.tol",
       [](RunConfig& c, const std::string& v) {
         c.spe_tol = ToDouble("spe.tol", v);
       }},
      {"spe.window",
       [](RunConfig& c, const std::string& v) {
         c.window = static_cast<int>(ToInt("window", v));
       }},
      {"spe.max_steps",
       [](RunConfig& c, const std::string& v) {
         c.max_steps = ToInt("max_steps", v);
       }},
      {"spe.project",
       [](RunConfig& c, const std::string& v) {
         c.project = ToBool("project", v);
       }},
      {"spe.literal_regressor",
       [](RunConfig& c, const std::string& v) {
         c.literal_regressor = ToBool("literal_regressor", v);
       }},
      {"d3pi.tol",
       [](RunConfig& c, const std::string& v) { c.tol = ToDouble("tol", v); }},
      {"d3pi.max_iter",
       [](RunConfig& c, const std::string& v) {
         c.max_iter = static_cast<int>(ToInt("max_iter", v));
       }},
      {"d3pi.xi_variant",
       [](RunConfig& c, const std::string& v) {
         if (v == "algorithm") {
           c.xi_variant = XiVariant::kAlgorithm;
         } else if (v == "proof") {
           c.xi_variant = XiVariant::kProof;
         } else {
           throw ConfigError("xi_variant must be algorithm or proof");
         }
       }},
      {"d3pi.k1_r_scale",
       [](RunConfig& c, const std::string& v) {
         c.k1_r_scale = ToDouble("k1_r_scale", v);
       }},
  };
  return table;
}

void Validate(const RunConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (c.nodes < 1) throw ConfigError("nodes must be >= 1");
  if (c.horizon < 0) throw ConfigError("horizon must be >= 0");
  if (!(c.beta > 0.0)) throw ConfigError("beta must be positive");
  if (c.sigma < 0.0) throw ConfigError("sigma must be >= 0");
  if (c.window < 1) throw ConfigError("window must be >= 1");
  if (c.max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (c.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(c.tol > 0.0) || !(c.spe_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (!(c.k1_r_scale > 0.0)) throw ConfigError("k1_r_scale must be positive");
  if (c.agent_source == "file" && (c.a_file.empty() || c.b_file.empty())) {
    throw ConfigError("agent.source=file needs a_file and b_file");
  }
  if (c.graph_type == "file" && c.graph_file.empty()) {
    throw ConfigError("graph.type=file needs graph.file");
  }
}

std::string Num(double v) { return csv::Format(v); }

}  // namespace

RunConfig ParseConfig(std::istream& in, const std::string& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = section + "." + Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto it = Setters().find(key);
    if (it == Setters().end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    }
    it->second(cfg, value);
  }
  Validate(cfg);
  return cfg;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  const auto parent = std::filesystem::path(path).parent_path();
  return ParseConfig(in, parent.empty() ? "." : parent.string());
}

void WriteConfig(const RunConfig& c, std::ostream& out) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "[agent]\n"
      << "source = " << c.agent_source << "\n";
  if (!c.a_file.empty()) out << "a_file = " << c.a_file << "\n";
  if (!c.b_file.empty()) out << "b_file = " << c.b_file << "\n";
  out << "continuous = " << b(c.continuous) << "\n"
      << "dt = " << Num(c.dt) << "\n"
      << "normalize = " << b(c.normalize) << "\n"
      << "\n[graph]\n"
      << "type = " << c.graph_type << "\n"
      << "nodes = " << c.nodes << "\n";
  if (!c.graph_file.empty()) out << "file = " << c.graph_file << "\n";
  out << "\n[cost]\n"
      << "q1 = " << c.q1 << "\n"
      << "q2 = " << c.q2 << "\n"
      << "r = " << c.r << "\n"
      << "\n[run]\n"
      << "seed = " << c.seed << "\n"
      << "variant = " << VariantName(c.variant) << "\n"
      << "horizon = " << c.horizon << "\n"
      << "out = " << c.out << "\n"
      << "write_states = " << b(c.write_states) << "\n"
      << "\n[spe]\n"
      << "beta = " << Num(c.beta) << "\n"
      << "sigma = " << Num(c.sigma) << "\n"
      << "tol = " << Num(c.spe_tol) << "\n"
      << "window = " << c.window << "\n"
      << "max_steps = " << c.max_steps << "\n"
      << "project = " << b(c.project) << "\n"
      << "literal_regressor = " << b(c.literal_regressor) << "\n"
      << "\n[d3pi]\n"
      << "tol = " << Num(c.tol) << "\n"
      << "max_iter = " << c.max_iter << "\n"
      << "xi_variant = "
      << (c.xi_variant == XiVariant::kAlgorithm ? "algorithm" : "proof")
      << "\n"
      << "k1_r_scale = " << Num(c.k1_r_scale) << "\n";
}

MatrixXd ParseMatrixSpec(const std::string& spec, int dim) {
  const std::string s = Trim(spec);
  if (s.find_first_of(",;") == std::string::npos) {
    return ToDouble("matrix", s) * MatrixXd::Identity(dim, dim);
  }
  std::vector<std::vector<double>> rows;
  std::stringstream rs(s);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> vals;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      vals.push_back(ToDouble("matrix", Trim(cell)));
    }
    rows.push_back(std::move(vals));
  }
  if (static_cast<int>(rows.size()) != dim) {
    throw ConfigError("matrix '" + s + "': expected " + std::to_string(dim) +
                      " rows");
  }
  MatrixXd out(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(rows[i].size()) != dim) {
      throw ConfigError("matrix '" + s + "': row " + std::to_string(i) +
                        " has the wrong length");
    }
    for (int j = 0; j < dim; ++j) out(i, j) = rows[i][j];
  }
  return out;
}

MatrixXd LoadMatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ls(line);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) vals.push_back(ToDouble(path, tok));
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ConfigError("matrix file '" + path + "' is empty");
  MatrixXd out(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw ConfigError("matrix file '" + path + "': ragged rows");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

Scenario BuildScenario(const RunConfig& cfg) {
  MatrixXd a;
  MatrixXd b;
  bool continuous = true;
  if (cfg.agent_source == "engine") {
    const ContinuousModel e = EngineModel();
    a = e.ac;
    b = e.bc;
  } else {
    a = LoadMatrix(Resolve(cfg.base_dir, cfg.a_file));
    b = LoadMatrix(Resolve(cfg.base_dir, cfg.b_file));
    continuous = cfg.continuous;
  }
  AgentModel agent = continuous ? Discretize(a, b, cfg.dt) : AgentModel(a, b);
  VectorXd scale = VectorXd::Ones(agent.n());
  if (cfg.normalize) {
    NormalizedAgent na = NormalizeStates(agent);
    agent = na.agent;
    scale = na.scale;
  }

  CommGraph graph = [&] {
    if (cfg.graph_type == "path") return CommGraph::Path(cfg.nodes);
    if (cfg.graph_type == "star") return CommGraph::Star(cfg.nodes);
    if (cfg.graph_type == "complete") return CommGraph::Complete(cfg.nodes);
    if (cfg.graph_type == "edgeless") return CommGraph::Edgeless(cfg.nodes);
    return CommGraph::Load(Resolve(cfg.base_dir, cfg.graph_file));
  }();

  const int n = agent.n();
  const int m = agent.m();
  MatrixXd q1 = ParseMatrixSpec(cfg.q1, n);
  MatrixXd q2 = ParseMatrixSpec(cfg.q2, n);
  MatrixXd r = ParseMatrixSpec(cfg.r, m);
  try {
    MakeCompoundCost(graph, q1, q2, r);
  } catch (const NumericalError& e) {
    throw ConfigError(std::string("cost: ") + e.what());
  }
  const double rho = linalg::SpectralRadius(agent.a());
  return Scenario{std::move(agent), std::move(scale), std::move(graph),
                  std::move(q1),    std::move(q2),    std::move(r),
                  rho};
}

MatrixXd InitialGain(const Scenario& s, double r_scale) {
  const MatrixXd r = r_scale * s.r;
  const MatrixXd p = oracle::DareSolve(s.agent.a(), s.agent.b(), s.q1, r);
  return oracle::DareGain(s.agent.a(), s.agent.b(), r, p);
}

VectorXd InitialState(int agents, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorXd x(static_cast<Eigen::Index>(agents) * n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uni(rng);
  return x;
}

namespace {

// Exploration noise gets its own stream so x0 does not shift with it.
std::uint64_t NoiseSeed(std::uint64_t seed) {
  return seed ^ 0x9E3779B97F4A7C15ULL;
}

struct CostMeter {
  const Scenario* s;
  std::vector<char> in_subgraph;
  std::vector<std::pair<int, int>> edges;
  double total = 0.0;
  double rest = 0.0;

  void Add(const VectorXd& x, const VectorXd& u) {
    const int n = s->agent.n();
    const int m = s->agent.m();
    for (int i = 0; i < s->graph.node_count(); ++i) {
      const auto xi = x.segment(i * n, n);
      const auto ui = u.segment(i * m, m);
      const double c = xi.dot(s->q1 * xi) + ui.dot(s->r * ui);
      total += c;
      if (!in_subgraph[i]) rest += c;
    }
    for (const auto& [i, j] : edges) {
      const VectorXd e = x.segment(i * n, n) - x.segment(j * n, n);
      const double c = e.dot(s->q2 * e);
      total += c;
      if (!in_subgraph[i] || !in_subgraph[j]) rest += c;
    }
  }
};

void WriteGains(const std::vector<GainState>& history, const Scenario& s,
                const SubgraphSelection& sel, const D3piConfig& dc,
                std::ostream& out) {
  const int n = s.agent.n();
  const int m = s.agent.m();
  out << "k";
  for (const char* name : {"K", "L"}) {
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < m; ++r) out << ',' << name << '_' << r << '_' << c;
    }
  }
  out << ",gamma,tau,rho_agent,rho_network,spe_steps\n";
  const MatrixXd eye = MatrixXd::Identity(s.graph.node_count(),
                                          s.graph.node_count());
  const MatrixXd a_hat = linalg::Kron(eye, s.agent.a());
  const MatrixXd b_hat = linalg::Kron(eye, s.agent.b());
  for (const GainState& g : history) {
    out << g.k;
    for (const MatrixXd* mat : {&g.k_gain, &g.l_gain}) {
      for (int c = 0; c < n; ++c) {
        for (int r = 0; r < m; ++r) out << ',' << Num((*mat)(r, c));
      }
    }
    const double rho_agent =
        linalg::SpectralRadius(s.agent.a() + s.agent.b() * g.dk());
    const double rho_net = linalg::SpectralRadius(
        a_hat + b_hat * LearningPolicy(g, s.graph, sel, dc));
    out << ',' << Num(g.gamma) << ',' << Num(g.tau) << ',' << Num(rho_agent)
        << ',' << Num(rho_net) << ',' << g.spe_steps << '\n';
  }
}

void WriteFile(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << body;
}

}  // namespace

RunSummary RunBenchmark(const RunConfig& cfg, bool write_files) {
  const Scenario s = BuildScenario(cfg);
  const int nodes = s.graph.node_count();
  const int n = s.agent.n();

  NetworkSimulator sim(CompoundSystem(s.agent, nodes),
                       NetworkState{0, InitialState(nodes, n, cfg.seed)});

  const SubgraphSelection sel = SelectSubgraph(s.graph);
  CostMeter meter{&s, std::vector<char>(nodes, 0), s.graph.edges()};
  for (int i : sel.members) meter.in_subgraph[i] = 1;

  RunSummary sum;
  sum.variant = cfg.variant;
  sum.nodes = nodes;
  const bool states = write_files && cfg.write_states;
  std::ostringstream states_csv;
  std::ostringstream costs_csv;
  if (states) {
    states_csv << "t,agent_id";
    for (int j = 0; j < n; ++j) states_csv << ",x" << (j + 1);
    states_csv << '\n';
  }
  if (write_files) costs_csv << "t,cost,rest_cost\n";
  auto write_state = [&](std::int64_t t, const VectorXd& x) {
    for (int i = 0; i < nodes; ++i) {
      states_csv << t << ',' << i;
      for (int j = 0; j < n; ++j) {
        states_csv << ',' << Num(s.scale(j) * x(i * n + j));
      }
      states_csv << '\n';
    }
  };
  sim.set_observer([&](const NetworkState& before, const VectorXd& u) {
    meter.Add(before.x, u);
    sum.cost_curve.push_back(meter.total);
    if (states) write_state(before.t, before.x);
    if (write_files) {
      costs_csv << (before.t + 1) << ',' << Num(meter.total) << ','
                << Num(meter.rest) << '\n';
    }
  });

  D3piConfig dc;
  dc.q1 = s.q1;
  dc.q2 = s.q2;
  dc.r = s.r;
  dc.tol = cfg.tol;
  dc.max_iter = cfg.max_iter;
  dc.spe.beta = cfg.beta;
  dc.spe.noise_variance = cfg.sigma;
  dc.spe.tol = cfg.spe_tol;
  dc.spe.window = cfg.window;
  dc.spe.max_steps = cfg.max_steps;
  dc.spe.project_structure = cfg.project;
  dc.spe.literal_regressor = cfg.literal_regressor;
  dc.xi_variant = cfg.xi_variant;
  dc.coordinate_rest = cfg.variant == Variant::kD3piOn;
  dc.seed = NoiseSeed(cfg.seed);

  D3piResult learned;
  if (cfg.variant == Variant::kLqrBaseline) {
    sum.final_policy = oracle::UnstructuredLqr(s.agent, s.graph, s.q1, s.q2,
                                               s.r);
    sim.set_policy(sum.final_policy);
  } else {
    dc.k1 = InitialGain(s, cfg.k1_r_scale);
    learned = RunD3pi(sim, s.graph, dc);
    sum.final_policy = learned.final_policy;
    sum.k = learned.k;
    sum.l = learned.l;
    sum.tau = learned.tau;
    sum.gamma = learned.gamma;
    sum.iterations = static_cast<int>(learned.history.size()) - 1;
    sum.learning_steps = learned.total_steps;
    sum.spe_seconds = learned.spe_seconds;
    sum.converged = learned.converged;
  }
  while (sim.state().t < cfg.horizon) sim.Advance();
  sim.set_observer(nullptr);
  if (states) write_state(sim.state().t, sim.state().x);

  sum.steps = sim.state().t;
  sum.cost = meter.total;
  sum.rest_cost = meter.rest;
  sum.policy_cost = oracle::EvaluatePolicyCost(sum.final_policy, s.graph,
                                               s.agent, s.q1, s.q2, s.r);

  if (write_files) {
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    if (states) WriteFile(dir / "states.csv", states_csv.str());
    WriteFile(dir / "costs.csv", costs_csv.str());
    if (cfg.variant != Variant::kLqrBaseline) {
      std::ostringstream gains;
      WriteGains(learned.history, s, learned.selection, dc, gains);
      WriteFile(dir / "gains.csv", gains.str());
    }
    std::ostringstream meta;
    WriteConfig(cfg, meta);
    meta << "\n[result]\n"
         << "nodes = " << nodes << "\n"
         << "agent_n = " << n << "\n"
         << "agent_m = " << s.agent.m() << "\n"
         << "rho_a = " << Num(s.rho_a) << "\n"
         << "subgraph =";
    for (int i : sel.members) meta << ' ' << i;
    meta << "\n"
         << "converged = " << (sum.converged ? "true" : "false") << "\n"
         << "iterations = " << sum.iterations << "\n"
         << "learning_steps = " << sum.learning_steps << "\n"
         << "steps = " << sum.steps << "\n"
         << "horizon_exceeded = "
         << (sum.learning_steps > cfg.horizon ? "true" : "false") << "\n"
         << "cumulative_cost = " << Num(sum.cost) << "\n"
         << "cumulative_rest_cost = " << Num(sum.rest_cost) << "\n"
         << "policy_cost_trace = " << Num(sum.policy_cost) << "\n"
         << "tau = " << Num(sum.tau) << "\n"
         << "gamma = " << Num(sum.gamma) << "\n"
         << "state_scale =";
    for (int j = 0; j < n; ++j) meta << ' ' << Num(s.scale(j));
    meta << "\n";
    WriteFile(dir / "meta.txt", meta.str());
  }
  return sum;
}

std::vector<std::vector<RunSummary>> SweepAgents(const RunConfig& cfg,
                                                 const std::vector<int>& sizes,
                                                 std::ostream& summary) {
  summary << "nodes,cost_lqr_baseline,cost_d3pi_on,cost_d3pi_off,"
             "spe_seconds_on,spe_seconds_off,learning_steps_on,"
             "learning_steps_off\n";
  std::vector<std::vector<RunSummary>> all;
  for (int nodes : sizes) {
    RunConfig c = cfg;
    c.nodes = nodes;
    std::vector<RunSummary> row;
    for (Variant v :
         {Variant::kLqrBaseline, Variant::kD3piOn, Variant::kD3piOff}) {
      c.variant = v;
      row.push_back(RunBenchmark(c, false));
    }
    summary << nodes << ',' << Num(row[0].cost) << ',' << Num(row[1].cost)
            << ',' << Num(row[2].cost) << ',' << Num(row[1].spe_seconds) << ','
            << Num(row[2].spe_seconds) << ',' << row[1].learning_steps << ','
            << row[2].learning_steps << '\n';
    all.push_back(std::move(row));
  }
  return all;
}

std::vector<int> ParseRange(const std::string& s) {
  std::vector<int> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const auto lo = ToInt("agents", Trim(s.substr(0, dots)));
    const auto hi = ToInt("agents", Trim(s.substr(dots + 2)));
    if (lo < 1 || hi < lo) throw ConfigError("agents: bad range '" + s + "'");
    for (auto i = lo; i <= hi; ++i) out.push_back(static_cast<int>(i));
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto v = ToInt("agents", Trim(tok));
    if (v < 1) throw ConfigError("agents: sizes must be >= 1");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ConfigError("agents: empty list");
  return out;
}

}  // namespace d3pi::bench
