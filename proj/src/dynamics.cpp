#include "fadp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fadp/errors.hpp"

namespace fadp {

PolynomialField::PolynomialField(int state_dim, std::vector<std::vector<Monomial>> components)
    : state_dim_(state_dim), components_(std::move(components)) {
  if (state_dim_ <= 0) throw ValidationError("vector field: state dimension must be positive");
  for (const auto& comp : components_) {
    for (const auto& term : comp) {
      if (static_cast<int>(term.exponents.size()) != state_dim_) {
        throw ValidationError("vector field: monomial exponent vector has length " +
                              std::to_string(term.exponents.size()) + ", expected " +
                              std::to_string(state_dim_));
      }
      for (int p : term.exponents) {
        if (p < 0) throw ValidationError("vector field: negative exponent");
      }
      if (!std::isfinite(term.coeff)) throw ValidationError("vector field: non-finite coefficient");
    }
  }
}

PolynomialField PolynomialField::zero(int state_dim, int output_dim) {
  return PolynomialField(state_dim, std::vector<std::vector<Monomial>>(output_dim));
}

Eigen::VectorXd PolynomialField::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim_) {
    throw ValidationError("vector field: state has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(state_dim_));
  }
  Eigen::VectorXd out(output_dim());
  for (int c = 0; c < output_dim(); ++c) {
    double acc = 0.0;
    for (const auto& term : components_[c]) {
      double v = term.coeff;
      for (int k = 0; k < state_dim_; ++k) {
        for (int p = 0; p < term.exponents[k]; ++p) v *= x(k);
      }
      acc += v;
    }
    out(c) = acc;
  }
  return out;
}

Eigen::MatrixXd AgentModel::input_matrix(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd g(state_dim(), input_dim());
  for (int k = 0; k < input_dim(); ++k) g.col(k) = input_columns[k](x);
  return g;
}

void AgentModel::validate() const {
  const int n = state_dim();
  if (n <= 0) throw ValidationError("agent: drift field is empty");
  if (drift.output_dim() != n) throw ValidationError("agent: drift must map R^n to R^n");
  if (input_columns.empty()) throw ValidationError("agent: at least one control input required");
  for (const auto& col : input_columns) {
    if (col.state_dim() != n || col.output_dim() != n) {
      throw ValidationError("agent: every input-map column must map R^n to R^n");
    }
  }
  if (!(g_norm_bound > 0.0)) throw ValidationError("agent: g_norm_bound must be positive");
  if (drift(Eigen::VectorXd::Zero(n)).norm() != 0.0) {
    throw ValidationError("agent: drift must vanish at the origin");
  }
}

double sampled_input_norm(const AgentModel& agent, double half_width, int samples_per_axis) {
  const int n = agent.state_dim();
  const int k = std::max(samples_per_axis, 2);
  std::vector<int> idx(n, 0);
  double worst = 0.0;
  Eigen::VectorXd x(n);
  while (true) {
    for (int d = 0; d < n; ++d) x(d) = -half_width + 2.0 * half_width * idx[d] / (k - 1);
    const Eigen::MatrixXd g = agent.input_matrix(x);
    worst = std::max(worst, Eigen::JacobiSVD<Eigen::MatrixXd>(g).singularValues()(0));
    int d = 0;
    while (d < n && ++idx[d] == k) idx[d++] = 0;
    if (d == n) break;
  }
  return worst;
}

namespace {

Monomial mono(double c, int p1, int p2) { return {c, {p1, p2}}; }

}  // namespace

PolynomialField benchmark_drift() {
  // -(x1 + x2)(1 - x1)^2 expanded.
  return PolynomialField(2, {
                                {mono(1, 0, 1), mono(-1, 2, 1)},
                                {mono(-1, 1, 0), mono(2, 2, 0), mono(-1, 3, 0), mono(-1, 0, 1),
                                 mono(2, 1, 1), mono(-1, 2, 1)},
                            });
}

const std::vector<double>& benchmark_input_coeffs() {
  static const std::vector<double> coeffs{1.0, 1.5, -0.2, 0.3, -0.9};
  return coeffs;
}

AgentModel benchmark_agent(double input_coeff, std::string name, double g_norm_bound) {
  AgentModel agent;
  agent.builtin = std::move(name);
  agent.drift = benchmark_drift();
  agent.input_columns = {PolynomialField(2, {{}, {mono(input_coeff, 0, 2)}})};
  agent.g_norm_bound = g_norm_bound;
  return agent;
}

bool is_builtin_agent(const std::string& name) {
  const std::string prefix = "paper_node_";
  if (name.rfind(prefix, 0) != 0 || name.size() != prefix.size() + 1) return false;
  const int k = name.back() - '0';
  return k >= 1 && k <= static_cast<int>(benchmark_input_coeffs().size());
}

AgentModel builtin_agent(const std::string& name, double g_norm_bound) {
  if (!is_builtin_agent(name)) throw ValidationError("unknown builtin agent model '" + name + "'");
  const int k = name.back() - '1';
  return benchmark_agent(benchmark_input_coeffs()[k], name, g_norm_bound);
}

PolynomialField builtin_leader(const std::string& name) {
  if (name != "paper_leader") throw ValidationError("unknown builtin leader model '" + name + "'");
  return benchmark_drift();
}

void Network::validate() const {
  if (static_cast<int>(agents.size()) != graph.size()) {
    throw ValidationError("network: " + std::to_string(agents.size()) + " agent models for a " +
                          std::to_string(graph.size()) + "-node graph");
  }
  const int n = leader.state_dim();
  if (n <= 0 || leader.output_dim() != n) throw ValidationError("network: leader drift must map R^n to R^n");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].validate();
    if (agents[i].state_dim() != n) {
      throw ValidationError("network: agent " + std::to_string(i + 1) +
                            " state dimension differs from the leader's");
    }
  }
}

namespace {

void check_states(int n_agents, States states, const Eigen::VectorXd& leader_state) {
  if (static_cast<int>(states.size()) != n_agents) {
    throw ValidationError("consensus: expected " + std::to_string(n_agents) + " agent states, got " +
                          std::to_string(states.size()));
  }
  for (const auto& x : states) {
    if (x.size() != leader_state.size()) throw ValidationError("consensus: state dimension mismatch");
  }
}

const Eigen::VectorXd& control_of(const Network& net, int j, States controls) {
  if (j >= static_cast<int>(controls.size()) || controls[j].size() != net.agents[j].input_dim()) {
    throw ValidationError("missing control input for agent " + std::to_string(j + 1));
  }
  return controls[j];
}

}  // namespace

Eigen::VectorXd consensus_error(const DiGraph& graph, int i, States states,
                                const Eigen::VectorXd& leader_state) {
  check_states(graph.size(), states, leader_state);
  Eigen::VectorXd e = graph.pinning(i) * (states[i] - leader_state);
  for (int j : graph.neighbors(i)) e += graph.weight(i, j) * (states[i] - states[j]);
  return e;
}

Eigen::VectorXd global_error(const DiGraph& graph, States states,
                             const Eigen::VectorXd& leader_state) {
  check_states(graph.size(), states, leader_state);
  const int n = static_cast<int>(leader_state.size());
  const int big_n = graph.size();
  Eigen::VectorXd deviation(big_n * n);
  for (int j = 0; j < big_n; ++j) deviation.segment(j * n, n) = states[j] - leader_state;
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(big_n * n, big_n * n);
  const Eigen::MatrixXd c = graph.coupling_matrix();
  for (int i = 0; i < big_n; ++i) {
    for (int j = 0; j < big_n; ++j) {
      kron.block(i * n, j * n, n, n) = c(i, j) * Eigen::MatrixXd::Identity(n, n);
    }
  }
  return kron * deviation;
}

Eigen::VectorXd drift_mismatch(const Network& net, int j, const Eigen::VectorXd& x_j,
                               const Eigen::VectorXd& leader_state) {
  return net.agents[j].drift(x_j) - net.leader(leader_state);
}

Eigen::VectorXd error_rate(const Network& net, int i, States states,
                           const Eigen::VectorXd& leader_state, States controls) {
  check_states(net.size(), states, leader_state);
  const Eigen::VectorXd f0 = net.leader(leader_state);
  auto term = [&](int j) -> Eigen::VectorXd {
    const auto& agent = net.agents[j];
    return agent.drift(states[j]) - f0 + agent.input_matrix(states[j]) * control_of(net, j, controls);
  };
  Eigen::VectorXd rate = net.graph.self_coupling(i) * term(i);
  for (int j : net.graph.neighbors(i)) rate -= net.graph.weight(i, j) * term(j);
  return rate;
}

Eigen::VectorXd contracted_error_rate(const Network& net, int i, States states,
                                      const Eigen::VectorXd& leader_state, States controls) {
  check_states(net.size(), states, leader_state);
  const int n = static_cast<int>(leader_state.size());
  const int big_n = net.size();
  Eigen::VectorXd stacked(big_n * n);
  for (int j = 0; j < big_n; ++j) {
    const auto& agent = net.agents[j];
    stacked.segment(j * n, n) = drift_mismatch(net, j, states[j], leader_state) +
                                agent.input_matrix(states[j]) * control_of(net, j, controls);
  }
  // (L_i + B_i) kron I_n as an n x Nn block row.
  const Eigen::RowVectorXd row = net.graph.laplacian().row(i) +
                                 Eigen::RowVectorXd::Unit(big_n, i) * net.graph.pinning(i);
  Eigen::MatrixXd block(n, big_n * n);
  for (int j = 0; j < big_n; ++j) block.middleCols(j * n, n) = row(j) * Eigen::MatrixXd::Identity(n, n);
  return block * stacked;
}

}  // namespace fadp
