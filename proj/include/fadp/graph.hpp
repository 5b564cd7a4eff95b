#pragma once

#include <vector>

#include <Eigen/Dense>

namespace fadp {

// Directed edge "from -> to": node `to` receives the state of node `from`.
// Indices are zero-based.
struct Edge {
  int from;
  int to;
  double weight;
};

// Weighted communication digraph with leader pinning gains.
//
// adjacency(i, j) = a_ij > 0 iff node i hears node j. pinning(i) = b_i is the
// gain of the direct leader link into node i. Immutable after construction.
class DiGraph {
 public:
  // Single node pinned to the leader with unit gain.
  DiGraph() : DiGraph(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1)) {}
  DiGraph(Eigen::MatrixXd adjacency, Eigen::VectorXd pinning);

  static DiGraph from_edges(int n_agents, const std::vector<Edge>& edges,
                            Eigen::VectorXd pinning);

  // Unit-weight ring where node i hears node i-1 (mod n).
  static DiGraph directed_ring(int n_agents, int pinned_node,
                               double pinning_gain = 1.0);

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const Eigen::VectorXd& pinning() const { return pinning_; }
  double weight(int i, int j) const { return adjacency_(i, j); }
  double pinning(int i) const { return pinning_(i); }

  // N_i in ascending order.
  std::vector<int> neighbors(int i) const;
  std::vector<Edge> edges() const;

  // L = D - A.
  Eigen::MatrixXd laplacian() const;
  // L + B.
  Eigen::MatrixXd coupling_matrix() const;
  // Row i of L + B. Nonzero only at i and at neighbors of i.
  Eigen::RowVectorXd coupling_row(int i) const;
  // l_ii + b_ii.
  double self_coupling(int i) const;

  // Ignores pinning.
  bool is_strongly_connected() const;

 private:
  void check_index(int i) const;

  Eigen::MatrixXd adjacency_;
  Eigen::VectorXd pinning_;
};

}  // namespace fadp
