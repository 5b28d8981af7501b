#include "d3pi/graph.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "d3pi/errors.h"
#include "d3pi/linalg.h"

namespace d3pi {

using Eigen::MatrixXd;

CommGraph::CommGraph(int node_count,
                     const std::vector<std::pair<int, int>>& edges) {
  if (node_count < 1) throw DimensionError("graph: need at least one node");
  adjacency_.resize(node_count);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= node_count || j >= node_count) {
      throw DimensionError("graph: edge label out of range");
    }
    if (i == j) throw DimensionError("graph: self-loops are not allowed");
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nb : adjacency_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

CommGraph CommGraph::Path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return CommGraph(n, e);
}

CommGraph CommGraph::Star(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return CommGraph(n, e);
}

CommGraph CommGraph::Complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return CommGraph(n, e);
}

CommGraph CommGraph::Edgeless(int n) { return CommGraph(n, {}); }

CommGraph CommGraph::Parse(std::istream& in) {
  int nodes = -1;
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first.rfind("nodes=", 0) == 0) {
      try {
        nodes = std::stoi(first.substr(6));
      } catch (const std::exception&) {
        throw ConfigError("edge list line " + std::to_string(line_no) +
                          ": bad node count");
      }
      continue;
    }
    int i = 0;
    int j = 0;
    std::istringstream pair_stream(line);
    std::string rest;
    if (!(pair_stream >> i >> j) || (pair_stream >> rest)) {
      throw ConfigError("edge list line " + std::to_string(line_no) +
                        ": expected `i j`");
    }
    edges.emplace_back(i, j);
  }
  if (nodes < 1) throw ConfigError("edge list: missing `nodes=N` header");
  try {
    return CommGraph(nodes, edges);
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("edge list: ") + e.what());
  }
}

CommGraph CommGraph::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list '" + path + "'");
  return Parse(in);
}

bool CommGraph::has_edge(int i, int j) const {
  const auto& nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::pair<int, int>> CommGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < node_count(); ++i) {
    for (int j : adjacency_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

bool SubgraphSelection::contains(int node) const {
  return position(node) >= 0;
}

int SubgraphSelection::position(int node) const {
  auto it = std::find(members.begin(), members.end(), node);
  return it == members.end() ? -1
                             : static_cast<int>(it - members.begin());
}

int MaxDegree(const CommGraph& g) {
  int best = 0;
  for (int i = 0; i < g.node_count(); ++i) best = std::max(best, g.degree(i));
  return best;
}

SubgraphSelection SelectSubgraph(const CommGraph& g) {
  const int dmax = MaxDegree(g);
  int hub = 0;
  while (g.degree(hub) != dmax) ++hub;
  SubgraphSelection sel;
  sel.members.push_back(hub);
  for (int j : g.neighbors(hub)) sel.members.push_back(j);
  return sel;
}

MatrixXd Adjacency(const CommGraph& g) {
  const int n = g.node_count();
  MatrixXd adj = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighbors(i)) adj(i, j) = 1.0;
  }
  return adj;
}

MatrixXd Laplacian(const CommGraph& g) {
  MatrixXd adj = Adjacency(g);
  MatrixXd lap = -adj;
  for (int i = 0; i < g.node_count(); ++i) lap(i, i) = g.degree(i);
  return lap;
}

namespace {

void ValidateCostBlocks(const MatrixXd& q1, const MatrixXd& q2,
                        const MatrixXd& r) {
  if (q1.rows() != q1.cols() || q2.rows() != q1.rows() ||
      q2.cols() != q1.cols() || r.rows() != r.cols()) {
    throw DimensionError("cost: Q1, Q2 must be n x n and R square");
  }
  if (!linalg::IsSymmetric(q1, 1e-10) || !linalg::IsSymmetric(q2, 1e-10) ||
      !linalg::IsSymmetric(r, 1e-10)) {
    throw NumericalError("cost: Q1, Q2, R must be symmetric");
  }
  if (!linalg::IsPositiveDefinite(q1)) {
    throw NumericalError("cost: Q1 must be positive definite");
  }
  if (q2.size() > 0 && linalg::MinEigenvalue(q2) < -1e-12) {
    throw NumericalError("cost: Q2 must be positive semidefinite");
  }
  if (!linalg::IsPositiveDefinite(r)) {
    throw NumericalError("cost: R must be positive definite");
  }
}

}  // namespace

CompoundCost MakeCompoundCost(const CommGraph& g, const MatrixXd& q1,
                              const MatrixXd& q2, const MatrixXd& r) {
  ValidateCostBlocks(q1, q2, r);
  const int nodes = g.node_count();
  CompoundCost out;
  out.q = linalg::Kron(MatrixXd::Identity(nodes, nodes), q1) +
          linalg::Kron(Laplacian(g), q2);
  out.r = linalg::Kron(MatrixXd::Identity(nodes, nodes), r);
  if (!linalg::IsPositiveDefinite(out.q)) {
    throw NumericalError("cost: compound Q is not positive definite");
  }
  return out;
}

SubgraphCost MakeSubgraphCost(int d, const MatrixXd& q1, const MatrixXd& q2,
                              const MatrixXd& r) {
  if (d < 2) throw DimensionError("subgraph cost: d must be >= 2");
  ValidateCostBlocks(q1, q2, r);
  const MatrixXd q_tilde = q1 + d * q2;
  return SubgraphCost{
      q_tilde,
      patterned::MakePatterned(d, q_tilde - q2, -q2),
      patterned::MakePatterned(d, r, MatrixXd::Zero(r.rows(), r.cols())),
  };
}

bool IsSparsityMember(const MatrixXd& k, const CommGraph& g, int m, int n,
                      double tol) {
  const int nodes = g.node_count();
  if (k.rows() != static_cast<Eigen::Index>(m) * nodes ||
      k.cols() != static_cast<Eigen::Index>(n) * nodes) {
    throw DimensionError("sparsity: gain is not mN x nN");
  }
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      if (i == j || g.has_edge(i, j)) continue;
      if (m * n == 0) continue;
      if (k.block(i * m, j * n, m, n).cwiseAbs().maxCoeff() > tol) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace d3pi
