#include "fadp/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fadp/errors.hpp"

namespace fadp {

namespace {


const Eigen::VectorXd& control_at(States controls, int j) {
  if (j < 0 || j >= static_cast<int>(controls.size()) || controls[j].size() == 0) {
    throw ValidationError("missing control input for agent " + std::to_string(j + 1));
  }
  return controls[j];
}

}  // namespace

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

void require_spd(const Eigen::MatrixXd& m, int dim, const std::string& what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw ValidationError(what + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw ValidationError(what + " must be symmetric");
  }
  if (!(min_eigenvalue(m) > 0.0)) throw ValidationError(what + " must be positive definite");
}

void CostSpec::validate(const Network& net, int i) const {
  const std::string who = "cost of agent " + std::to_string(i + 1) + ": ";
  require_spd(q, net.state_dim(), who + "Q");
  require_spd(r_self, net.agents[i].input_dim(), who + "R_self");
  const auto nbrs = net.graph.neighbors(i);
  for (int j : nbrs) {
    auto it = r_neighbors.find(j);
    if (it == r_neighbors.end()) {
      throw ValidationError(who + "R_ij missing for neighbor " + std::to_string(j + 1));
    }
    require_spd(it->second, net.agents[j].input_dim(), who + "R_" + std::to_string(j + 1));
  }
  for (const auto& [j, r] : r_neighbors) {
    if (std::find(nbrs.begin(), nbrs.end(), j) == nbrs.end()) {
      throw ValidationError(who + "R_ij given for non-neighbor " + std::to_string(j + 1));
    }
  }
}

void LearnerGains::validate(int state_dim, int input_dim) const {
  if (!std::isfinite(adaptation) || adaptation < 0.0) {
    throw ValidationError("learner: adaptation gain must be finite and >= 0");
  }
  if (!std::isfinite(gamma)) throw ValidationError("learner: gamma must be finite");
  if (!probing.channels.empty() && static_cast<int>(probing.channels.size()) != input_dim) {
    throw ValidationError("learner: probing needs one channel per control input");
  }
  std::vector<double> freqs;
  for (const auto& ch : probing.channels) {
    for (const auto& term : ch) {
      // NaN phase: drawn from the scenario seed when the run starts.
      if (!std::isfinite(term.amplitude) || std::isinf(term.phase)) {
        throw ValidationError("learner: probing amplitude and phase must be finite");
      }
      if (!(term.frequency > 0.0) || !std::isfinite(term.frequency)) {
        throw ValidationError("learner: probing frequencies must be positive");
      }
      if (term.amplitude != 0.0) freqs.push_back(term.frequency);
    }
  }
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  if (!freqs.empty() && static_cast<int>(freqs.size()) < (state_dim + 1) / 2) {
    throw ValidationError("learner: probing needs at least ceil(n/2) distinct nonzero frequencies");
  }
  if (!(probing.cutoff >= 0.0)) throw ValidationError("learner: probing cutoff must be >= 0");
}

double cost_rate(const CostSpec& spec, const Eigen::VectorXd& e_i, int i, States controls) {
  const Eigen::VectorXd& u = control_at(controls, i);
  double r = e_i.dot(spec.q * e_i) + u.dot(spec.r_self * u);
  for (const auto& [j, rij] : spec.r_neighbors) {
    const Eigen::VectorXd& uj = control_at(controls, j);
    r += uj.dot(rij * uj);
  }
  return r;
}

Eigen::VectorXd sigma_vector(const GfhmCritic& critic, const Network& net, int i, States states,
                             const Eigen::VectorXd& leader_state, States controls) {
  const Eigen::VectorXd e = consensus_error(net.graph, i, states, leader_state);
  return critic.gradient_matrix(e).transpose() * error_rate(net, i, states, leader_state, controls);
}

double hamiltonian_residual(const GfhmCritic& critic, const CostSpec& spec, const Network& net,
                            int i, States states, const Eigen::VectorXd& leader_state,
                            States controls) {
  const Eigen::VectorXd e = consensus_error(net.graph, i, states, leader_state);
  const Eigen::VectorXd sigma = sigma_vector(critic, net, i, states, leader_state, controls);
  return cost_rate(spec, e, i, controls) + critic.weights().dot(sigma);
}

Eigen::VectorXd weight_update_rate(double adaptation, const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& sigma, double cost) {
  return -adaptation * (sigma.dot(weights) + cost) * sigma;
}

Eigen::VectorXd control_law(const GfhmCritic& critic, const AgentModel& agent,
                            const DiGraph& graph, int i, const Eigen::VectorXd& x_i,
                            const Eigen::VectorXd& e_i, const CostSpec& spec) {
  return control_from_gradient(agent, graph, i, x_i, critic.value_gradient(e_i), spec);
}

Eigen::VectorXd control_from_gradient(const AgentModel& agent, const DiGraph& graph, int i,
                                      const Eigen::VectorXd& x_i,
                                      const Eigen::VectorXd& value_gradient,
                                      const CostSpec& spec) {
  const Eigen::VectorXd rhs =
      agent.input_matrix(x_i).transpose() * (graph.self_coupling(i) * value_gradient);
  return -0.5 * spec.r_self.ldlt().solve(rhs);
}

Eigen::VectorXd probing_signal(const ProbingSpec& spec, double t) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.channels.size()));
  if (t >= spec.cutoff) return out;
  for (std::size_t c = 0; c < spec.channels.size(); ++c) {
    for (const auto& term : spec.channels[c]) {
      out(static_cast<Eigen::Index>(c)) += term.amplitude * std::sin(term.frequency * t + term.phase);
    }
  }
  return out;
}

GainReport gain_check(const LearnerGains& gains, const CostSpec& spec, const DiGraph& graph,
                      int i, std::span<const double> betas, const RunStats& stats) {
  if (static_cast<int>(betas.size()) != graph.size()) {
    throw ValidationError("gain_check: one g-norm bound per agent required");
  }
  if (!std::isfinite(stats.sigma_max) || !std::isfinite(stats.q)) {
    throw ValidationError("gain_check: run statistics missing");
  }
  GainReport report;
  const double a = gains.adaptation;
  report.adaptation_in_range = a > 0.0 && a < 2.0;
  report.adaptation_sharp_limit =
      stats.sigma_max > 0.0 ? 2.0 * stats.q / (stats.sigma_max * stats.sigma_max) : 0.0;
  report.adaptation_sharp = a > 0.0 && a < report.adaptation_sharp_limit;

  const auto nbrs = graph.neighbors(i);
  double threshold = (static_cast<double>(nbrs.size()) + 1.0) / min_eigenvalue(spec.q);
  const Eigen::RowVectorXd row = graph.coupling_row(i);
  auto input_term = [&](int j, const Eigen::MatrixXd& r) {
    const double c = row(j) * betas[j];
    return c * c / (2.0 * min_eigenvalue(r));
  };
  threshold = std::max(threshold, input_term(i, spec.r_self));
  for (int j : nbrs) threshold = std::max(threshold, input_term(j, spec.r_neighbors.at(j)));
  report.gamma_threshold = threshold;
  report.gamma_ok = gains.gamma > threshold;
  return report;
}

UubBounds uub_bounds(const RunStats& stats, const LearnerGains& gains, const CostSpec& spec,
                     const DiGraph& graph, int i) {
  const double a = gains.adaptation;
  if (!(a > 0.0)) throw GainConditionError("gain conditions unsatisfied: a_i must be positive");
  const double numerator = stats.drift_coupling_sq + stats.eps_bar * stats.eps_bar / (2.0 * a);
  const double theta_den = stats.q - 0.5 * a * stats.sigma_max * stats.sigma_max;
  const double n_bar = static_cast<double>(graph.neighbors(i).size());
  const double e_den = 2.0 * gains.gamma * min_eigenvalue(spec.q) - 2.0 * (n_bar + 1.0);
  if (!(theta_den > 0.0)) {
    throw GainConditionError("gain conditions unsatisfied: q_i - a_i sigma_M^2 / 2 <= 0");
  }
  if (!(e_den > 0.0)) {
    throw GainConditionError("gain conditions unsatisfied: 2 Gamma_i lambda_min(Q) - 2(N_i + 1) <= 0");
  }
  return {std::sqrt(numerator / theta_den), std::sqrt(numerator / e_den)};
}

namespace {

Eigen::MatrixXd gram_of(std::span<const RegressionSample> samples) {
  const auto m = samples.front().sigma.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (const auto& s : samples) {
    if (s.sigma.size() != m) throw ValidationError("lsq: inconsistent regressor dimension");
    gram.selfadjointView<Eigen::Lower>().rankUpdate(s.sigma);
  }
  return gram.selfadjointView<Eigen::Lower>();
}

}  // namespace

double gram_condition_number(std::span<const RegressionSample> samples) {
  if (samples.empty()) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram_of(samples), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}

Eigen::VectorXd policy_evaluation_lsq(std::span<const RegressionSample> samples) {
  if (samples.empty()) throw InsufficientExcitation("insufficient excitation: no samples");
  const auto m = samples.front().sigma.size();
  if (static_cast<Eigen::Index>(samples.size()) < m) {
    throw InsufficientExcitation("insufficient excitation: " + std::to_string(samples.size()) +
                                 " samples for " + std::to_string(m) + " weights");
  }
  const Eigen::MatrixXd gram = gram_of(samples);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (const auto& s : samples) rhs += s.cost * s.sigma;
  if (gram_condition_number(samples) > 1e12) {
    throw InsufficientExcitation("insufficient excitation: Gram matrix is numerically singular");
  }
  return -gram.ldlt().solve(rhs);
}

}  // namespace fadp
