#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fadp/graph.hpp"

namespace fadp {

// coeff * prod_k x_k^exponents[k]
struct Monomial {
  double coeff = 0.0;
  std::vector<int> exponents;
};

// Polynomial map R^n -> R^k, one list of monomials per output component.
class PolynomialField {
 public:
  PolynomialField() = default;
  PolynomialField(int state_dim, std::vector<std::vector<Monomial>> components);

  static PolynomialField zero(int state_dim, int output_dim);

  int state_dim() const { return state_dim_; }
  int output_dim() const { return static_cast<int>(components_.size()); }
  const std::vector<std::vector<Monomial>>& components() const { return components_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

 private:
  int state_dim_ = 0;
  std::vector<std::vector<Monomial>> components_;
};

// x_i' = f(x_i) + g_i(x_i) u_i
struct AgentModel {
  // Registry name when the model came from a builtin; empty for custom fields.
  std::string builtin;
  PolynomialField drift;
  // Columns of g_i, each R^n -> R^n.
  std::vector<PolynomialField> input_columns;
  // Declared bound beta_i on ||g_i(x)|| over the operating region.
  double g_norm_bound = 1.0;

  int state_dim() const { return drift.state_dim(); }
  int input_dim() const { return static_cast<int>(input_columns.size()); }

  Eigen::VectorXd drift_at(const Eigen::VectorXd& x) const { return drift(x); }
  Eigen::MatrixXd input_matrix(const Eigen::VectorXd& x) const;

  // Throws ValidationError on dimension mismatch or drift(0) != 0.
  void validate() const;
};

// Largest ||g(x)|| (spectral norm) over a deterministic sample of the box
// [-half_width, half_width]^n, corners included.
double sampled_input_norm(const AgentModel& agent, double half_width, int samples_per_axis = 9);

// Builtin benchmark family: x1' = x2 - x1^2 x2,
// x2' = -(x1 + x2)(1 - x1)^2 + c x2^2 u.
PolynomialField benchmark_drift();
AgentModel benchmark_agent(double input_coeff, std::string name, double g_norm_bound);
// Per-node input coefficients of the five benchmark followers.
const std::vector<double>& benchmark_input_coeffs();

// Resolves `paper_node_1` .. `paper_node_5`. Throws ValidationError otherwise.
AgentModel builtin_agent(const std::string& name, double g_norm_bound);
// Resolves `paper_leader`.
PolynomialField builtin_leader(const std::string& name);
bool is_builtin_agent(const std::string& name);

// The follower models, the leader drift and the topology they share.
struct Network {
  DiGraph graph;
  std::vector<AgentModel> agents;
  PolynomialField leader;
  std::string leader_builtin;

  int size() const { return graph.size(); }
  int state_dim() const { return leader.state_dim(); }
  void validate() const;
};

using States = std::span<const Eigen::VectorXd>;

// e_i = sum_{j in N_i} a_ij (x_i - x_j) + b_i (x_i - x_0)
Eigen::VectorXd consensus_error(const DiGraph& graph, int i, States states,
                                const Eigen::VectorXd& leader_state);

// e = ((L + B) kron I_n)(x - 1 kron x_0), stacked node by node.
Eigen::VectorXd global_error(const DiGraph& graph, States states,
                             const Eigen::VectorXd& leader_state);

// f_ej = f_j(x_j) - f_0(x_0)
Eigen::VectorXd drift_mismatch(const Network& net, int j, const Eigen::VectorXd& x_j,
                               const Eigen::VectorXd& leader_state);

// e_i' = sum_{j in N_i + {i}} (l_ij + b_ij)(f_ej + g_j(x_j) u_j).
// Reads only node i and its neighbors; other entries of `controls` may be
// empty vectors.
Eigen::VectorXd error_rate(const Network& net, int i, States states,
                           const Eigen::VectorXd& leader_state, States controls);

// Same quantity through the full-network form: block i of
// ((L + B) kron I_n)(f_e + g u), evaluated over all N nodes.
Eigen::VectorXd contracted_error_rate(const Network& net, int i, States states,
                                      const Eigen::VectorXd& leader_state, States controls);

}  // namespace fadp
