#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fadp/dynamics.hpp"
#include "fadp/gfhm.hpp"
#include "fadp/graph.hpp"

namespace fadp {

// r_i = e^T Q e + u_i^T R_self u_i + sum_j u_j^T R_ij u_j
struct CostSpec {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r_self;
  // Neighbor index (zero-based) -> R_ij.
  std::map<int, Eigen::MatrixXd> r_neighbors;

  // Symmetric positive-definite Q and R_self, R_ij for exactly the neighbors
  // of node i with the neighbors' input dimensions.
  void validate(const Network& net, int i) const;
};

struct ProbingTerm {
  double amplitude = 0.0;
  // rad/s
  double frequency = 1.0;
  // NaN means "draw from the scenario seed".
  double phase = 0.0;
};

// Sum of sinusoids per control channel, silenced from `cutoff` seconds on.
struct ProbingSpec {
  std::vector<std::vector<ProbingTerm>> channels;
  double cutoff = 10.0;
};

struct LearnerGains {
  // a_i
  double adaptation = 0.1;
  ProbingSpec probing;
  // Gamma_i, only used by gain_check and uub_bounds.
  double gamma = 250.0;

  void validate(int state_dim, int input_dim) const;
};

double cost_rate(const CostSpec& spec, const Eigen::VectorXd& e_i, int i, States controls);

// sigma_i = Lambda_i(ebar_i)^T e_i'
Eigen::VectorXd sigma_vector(const GfhmCritic& critic, const Network& net, int i, States states,
                             const Eigen::VectorXd& leader_state, States controls);

// r_i + theta^T sigma_i, theta taken from the critic.
double hamiltonian_residual(const GfhmCritic& critic, const CostSpec& spec, const Network& net,
                            int i, States states, const Eigen::VectorXd& leader_state,
                            States controls);

// theta' = -a sigma (sigma^T theta + r)
Eigen::VectorXd weight_update_rate(double adaptation, const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& sigma, double cost);

// u_i = -1/2 R_ii^{-1} g_i(x_i)^T (l_ii + b_ii) Lambda_i(ebar_i) theta_i
Eigen::VectorXd control_law(const GfhmCritic& critic, const AgentModel& agent,
                            const DiGraph& graph, int i, const Eigen::VectorXd& x_i,
                            const Eigen::VectorXd& e_i, const CostSpec& spec);

// Same law from a precomputed value gradient Lambda_i theta_i.
Eigen::VectorXd control_from_gradient(const AgentModel& agent, const DiGraph& graph, int i,
                                      const Eigen::VectorXd& x_i,
                                      const Eigen::VectorXd& value_gradient,
                                      const CostSpec& spec);

Eigen::VectorXd probing_signal(const ProbingSpec& spec, double t);

// Quantities observed along a run that the stability diagnostics consume.
struct RunStats {
  // sup ||sigma_i||
  double sigma_max = 0.0;
  // lambda_min of the sample-averaged Gram matrix of sigma_i
  double q = 0.0;
  // Residual bound estimate (99th percentile of |residual_i|)
  double eps_bar = 0.0;
  // sup_t sum_{j in N_i + {i}} ||(l_ij + b_ij) f_ej(t)||^2
  double drift_coupling_sq = 0.0;
};

struct GainReport {
  bool adaptation_in_range = false;     // 0 < a < 2
  bool adaptation_sharp = false;        // 0 < a < 2 q / sigma_max^2
  double adaptation_sharp_limit = 0.0;  // 2 q / sigma_max^2
  double gamma_threshold = 0.0;         // required lower bound for Gamma
  bool gamma_ok = false;
  bool passed() const { return adaptation_in_range && gamma_ok; }
};

// betas: declared g-norm bounds of all agents, indexed by node.
GainReport gain_check(const LearnerGains& gains, const CostSpec& spec, const DiGraph& graph,
                      int i, std::span<const double> betas, const RunStats& stats);

struct UubBounds {
  double weight_error = 0.0;     // b_theta
  double consensus_error = 0.0;  // b_e
};

// Throws GainConditionError when a denominator is not positive.
UubBounds uub_bounds(const RunStats& stats, const LearnerGains& gains, const CostSpec& spec,
                     const DiGraph& graph, int i);

struct RegressionSample {
  Eigen::VectorXd sigma;
  double cost = 0.0;
};

// argmin_theta sum (sigma^T theta + r)^2 = -(sum sigma sigma^T)^{-1} sum sigma r.
// Throws InsufficientExcitation when fewer than m samples are given or the
// Gram matrix is numerically singular.
Eigen::VectorXd policy_evaluation_lsq(std::span<const RegressionSample> samples);

// lambda_max / lambda_min of sum sigma sigma^T (infinity when singular).
double gram_condition_number(std::span<const RegressionSample> samples);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

// Throws ValidationError unless m is a dim x dim symmetric positive-definite matrix.
void require_spd(const Eigen::MatrixXd& m, int dim, const std::string& what);

}  // namespace fadp
