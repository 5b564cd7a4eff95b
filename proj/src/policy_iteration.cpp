#include "fadp/policy_iteration.hpp"

#include <algorithm>
#include <string>

#include "fadp/errors.hpp"

namespace fadp {

std::vector<RegressionSample> regression_samples(const TrajectoryLog& log, int i, int stride) {
  std::vector<RegressionSample> out;
  const auto step = static_cast<std::size_t>(std::max(stride, 1));
  for (std::size_t k = 0; k < log.length(); k += step) {
    out.push_back({log.sigma[k][i], log.cost[k][i]});
  }
  return out;
}

PolicyIterationResult run_policy_iteration(const Scenario& scenario) {
  scenario.validate();
  const int big_n = scenario.size();
  const auto& settings = scenario.policy_iteration;

  PolicyIterationResult result;
  result.probe_points.resize(big_n);
  for (int i = 0; i < big_n; ++i) {
    const Eigen::VectorXd e0 =
        consensus_error(scenario.network.graph, i, scenario.initial_states, scenario.leader_initial);
    for (double scale : settings.probe_scales) result.probe_points[i].push_back(scale * e0);
  }

  std::vector<Eigen::VectorXd> weights = scenario.initial_weights();
  for (int k = 0; k < settings.max_iterations; ++k) {
    RunOptions opt;
    opt.adapt = false;
    opt.probing = true;
    opt.initial_weights = weights;
    TrajectoryLog log;
    try {
      log = simulate(scenario, opt);
    } catch (const NumericalBlowUp& err) {
      throw InadmissiblePolicy("inadmissible policy at iteration " + std::to_string(k) + ": " + err.what());
    }

    std::vector<Eigen::VectorXd> evaluated(big_n);
    std::vector<std::vector<double>> values(big_n);
    double change = 0.0;
    for (int i = 0; i < big_n; ++i) {
      const auto samples = regression_samples(log, i, settings.sample_stride);
      evaluated[i] = policy_evaluation_lsq(samples);
      const GfhmCritic critic = scenario.critics[i].with_weights(evaluated[i]);
      for (const auto& p : result.probe_points[i]) values[i].push_back(critic.value(p));
      change = std::max(change, (evaluated[i] - weights[i]).lpNorm<Eigen::Infinity>());
    }
    result.policy_weights.push_back(weights);
    result.evaluated_weights.push_back(evaluated);
    result.probe_values.push_back(std::move(values));
    result.weight_change.push_back(change);
    weights = std::move(evaluated);
    if (change < settings.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace fadp
