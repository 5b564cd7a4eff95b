#include "fadp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "fadp/errors.hpp"

namespace fadp {

DiGraph::DiGraph(Eigen::MatrixXd adjacency, Eigen::VectorXd pinning)
    : adjacency_(std::move(adjacency)), pinning_(std::move(pinning)) {
  const auto n = adjacency_.rows();
  if (n == 0 || adjacency_.cols() != n) {
    throw ValidationError("graph: adjacency must be a nonempty square matrix");
  }
  if (pinning_.size() != n) {
    throw ValidationError("graph: pinning vector length must equal the agent count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0) {
      throw ValidationError("graph: self loop at node " + std::to_string(i + 1));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(adjacency_(i, j)) || adjacency_(i, j) < 0.0) {
        throw ValidationError("graph: edge weight a_" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + " must be finite and >= 0");
      }
    }
    if (!std::isfinite(pinning_(i)) || pinning_(i) < 0.0) {
      throw ValidationError("graph: pinning gain b_" + std::to_string(i + 1) +
                            " must be finite and >= 0");
    }
  }
  if (!(pinning_.array() > 0.0).any()) {
    throw ValidationError("graph: b_i > 0 is required for at least one node");
  }
}

DiGraph DiGraph::from_edges(int n_agents, const std::vector<Edge>& edges,
                            Eigen::VectorXd pinning) {
  if (n_agents <= 0) throw ValidationError("graph: agent count must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_agents, n_agents);
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= n_agents || e.to < 0 || e.to >= n_agents) {
      throw ValidationError("graph: edge endpoint out of range");
    }
    if (a(e.to, e.from) != 0.0) {
      throw ValidationError("graph: repeated edge " + std::to_string(e.from + 1) +
                            " -> " + std::to_string(e.to + 1));
    }
    a(e.to, e.from) = e.weight;
  }
  return DiGraph(std::move(a), std::move(pinning));
}

DiGraph DiGraph::directed_ring(int n_agents, int pinned_node, double pinning_gain) {
  std::vector<Edge> edges;
  for (int i = 0; i < n_agents; ++i) {
    edges.push_back({(i + n_agents - 1) % n_agents, i, 1.0});
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_agents);
  b(pinned_node) = pinning_gain;
  return from_edges(n_agents, edges, std::move(b));
}

void DiGraph::check_index(int i) const {
  if (i < 0 || i >= size()) {
    throw ValidationError("graph: agent index " + std::to_string(i) + " out of range");
  }
}

std::vector<int> DiGraph::neighbors(int i) const {
  check_index(i);
  std::vector<int> out;
  for (int j = 0; j < size(); ++j) {
    if (adjacency_(i, j) > 0.0) out.push_back(j);
  }
  return out;
}

std::vector<Edge> DiGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (adjacency_(i, j) > 0.0) out.push_back({j, i, adjacency_(i, j)});
    }
  }
  return out;
}

Eigen::MatrixXd DiGraph::laplacian() const {
  Eigen::MatrixXd l = -adjacency_;
  for (int i = 0; i < size(); ++i) l(i, i) = adjacency_.row(i).sum();
  return l;
}

Eigen::MatrixXd DiGraph::coupling_matrix() const {
  Eigen::MatrixXd m = laplacian();
  m.diagonal() += pinning_;
  return m;
}

Eigen::RowVectorXd DiGraph::coupling_row(int i) const {
  check_index(i);
  Eigen::RowVectorXd row = -adjacency_.row(i);
  row(i) = adjacency_.row(i).sum() + pinning_(i);
  return row;
}

double DiGraph::self_coupling(int i) const {
  check_index(i);
  return adjacency_.row(i).sum() + pinning_(i);
}

bool DiGraph::is_strongly_connected() const {
  // Reachability from node 0 along edges and along reversed edges.
  auto reaches_all = [this](bool reversed) {
    std::vector<bool> seen(size(), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w = 0; w < size(); ++w) {
        const double a = reversed ? adjacency_(v, w) : adjacency_(w, v);
        if (a > 0.0 && !seen[w]) {
          seen[w] = true;
          frontier.push(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  };
  return reaches_all(false) && reaches_all(true);
}

}  // namespace fadp
