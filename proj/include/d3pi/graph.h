#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "d3pi/patterned.h"

namespace d3pi {

/// Undirected communication graph over nodes 0..N-1. No self-loops; need not
/// be connected.
class CommGraph {
 public:
  /// Throws DimensionError for out-of-range labels or self-loops. Duplicate
  /// edges are merged.
  CommGraph(int node_count, const std::vector<std::pair<int, int>>& edges);

  static CommGraph Path(int n);
  static CommGraph Star(int n);  // node 0 is the hub
  static CommGraph Complete(int n);
  static CommGraph Edgeless(int n);

  /// Parses the edge-list format: a `nodes=N` header line followed by one
  /// `i j` pair per line. Blank lines and `#` comments are ignored.
  /// Throws ConfigError on malformed input.
  static CommGraph Parse(std::istream& in);
  static CommGraph Load(const std::string& path);

  int node_count() const { return static_cast<int>(adjacency_.size()); }
  /// Sorted neighbor labels of `i` (excluding i).
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(i); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  bool has_edge(int i, int j) const;
  std::vector<std::pair<int, int>> edges() const;

 private:
  std::vector<std::vector<int>> adjacency_;
};

/// The learning subgraph: a maximum-degree hub followed by its neighbors, in
/// a frozen order that every lifted quantity uses.
struct SubgraphSelection {
  std::vector<int> members;
  /// True while the temporary links completing the subgraph are switched on.
  bool learn_mode = true;

  int size() const { return static_cast<int>(members.size()); }
  bool contains(int node) const;
  /// Position of `node` in `members`, or -1.
  int position(int node) const;
};

int MaxDegree(const CommGraph& g);

/// Picks the lowest-labelled node of maximum degree plus all of its
/// neighbors (ascending), so the result has d_max + 1 members.
SubgraphSelection SelectSubgraph(const CommGraph& g);

Eigen::MatrixXd Laplacian(const CommGraph& g);
Eigen::MatrixXd Adjacency(const CommGraph& g);

struct CompoundCost {
  Eigen::MatrixXd q;  // I_N (x) Q1 + L_G (x) Q2
  Eigen::MatrixXd r;  // I_N (x) R
};

/// Network-level cost. Validates Q1 > 0, Q2 >= 0, R > 0 (NumericalError).
CompoundCost MakeCompoundCost(const CommGraph& g, const Eigen::MatrixXd& q1,
                              const Eigen::MatrixXd& q2,
                              const Eigen::MatrixXd& r);

struct SubgraphCost {
  /// Q1 + d Q2.
  Eigen::MatrixXd q_tilde;
  /// I_d (x) Q~ - 1 1^T (x) Q2, i.e. the cost of the complete graph K_d.
  PatternedMatrix q;
  /// I_d (x) R.
  PatternedMatrix r;
};

SubgraphCost MakeSubgraphCost(int d, const Eigen::MatrixXd& q1,
                              const Eigen::MatrixXd& q2,
                              const Eigen::MatrixXd& r);

/// True iff every m x n block (i, j) with j outside N_i and j != i has
/// max-abs entry <= tol.
bool IsSparsityMember(const Eigen::MatrixXd& k, const CommGraph& g, int m,
                      int n, double tol);

}  // namespace d3pi
