#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fadp/controller.hpp"
#include "fadp/simulator.hpp"

namespace fadp {

struct PolicyIterationResult {
  // policy_weights[k][i]: weights defining the policy rolled out at iteration k.
  std::vector<std::vector<Eigen::VectorXd>> policy_weights;
  // evaluated_weights[k][i]: least-squares value weights of that policy.
  std::vector<std::vector<Eigen::VectorXd>> evaluated_weights;
  // probe_values[k][i][p]: evaluated value of agent i at its probe point p.
  std::vector<std::vector<std::vector<double>>> probe_values;
  // probe_points[i][p]
  std::vector<std::vector<Eigen::VectorXd>> probe_points;
  // max_i ||evaluated - policy||_inf per iteration.
  std::vector<double> weight_change;
  bool converged = false;

  int iterations() const { return static_cast<int>(evaluated_weights.size()); }
  const std::vector<Eigen::VectorXd>& final_weights() const { return evaluated_weights.back(); }
};

// Regression samples (sigma_i, r_i) of agent i taken every `stride` grid points.
std::vector<RegressionSample> regression_samples(const TrajectoryLog& log, int i, int stride);

// Alternates rollouts under the current critic policies (learning frozen,
// probing on), per-agent least-squares policy evaluation, and simultaneous
// improvement of all policies through the critic control law. Stops once
// the largest weight change drops below the tolerance or at the iteration
// cap. A rollout that trips the state guard raises InadmissiblePolicy.
PolicyIterationResult run_policy_iteration(const Scenario& scenario);

}  // namespace fadp
