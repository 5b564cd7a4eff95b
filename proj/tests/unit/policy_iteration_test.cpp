#include "fadp/errors.hpp"
#include "fadp/policy_iteration.hpp"
#include "fadp/scenario_io.hpp"

#include <gtest/gtest.h>

using namespace fadp;

namespace {

Scenario short_pi_benchmark() {
  Scenario s = paper_benchmark();
  s.mode = Mode::policy_iteration;
  s.integration.t_final = 10.0;
  return s;
}

}  // namespace

TEST(RegressionSamples, StrideAndContent) {
  Scenario s = paper_benchmark();
  s.integration.t_final = 1.0;
  const TrajectoryLog log = simulate(s);
  const auto samples = regression_samples(log, 2, 10);
  ASSERT_EQ(samples.size(), 101u);
  EXPECT_EQ(samples[3].sigma, log.sigma[30][2]);
  EXPECT_EQ(samples[3].cost, log.cost[30][2]);
}

TEST(PolicyIteration, ConvergesAndStopsAtFixedPoint) {
  const Scenario s = short_pi_benchmark();
  const PolicyIterationResult first = run_policy_iteration(s);
  ASSERT_TRUE(first.converged);
  EXPECT_LT(first.weight_change.back(), s.policy_iteration.tolerance);
  ASSERT_EQ(first.probe_points.size(), 5u);
  EXPECT_EQ(first.probe_points[0].size(), s.policy_iteration.probe_scales.size());
  EXPECT_EQ(first.probe_values.size(), static_cast<std::size_t>(first.iterations()));

  Scenario restart = s;
  for (int i = 0; i < s.size(); ++i) restart.critics[i] = s.critics[i].with_weights(first.final_weights()[i]);
  const PolicyIterationResult second = run_policy_iteration(restart);
  EXPECT_TRUE(second.converged);
  EXPECT_EQ(second.iterations(), 1);
}

TEST(PolicyIteration, PolicyWeightsFollowEvaluation) {
  Scenario s = short_pi_benchmark();
  s.policy_iteration.max_iterations = 3;
  s.policy_iteration.tolerance = 1e-12;
  const PolicyIterationResult r = run_policy_iteration(s);
  ASSERT_EQ(r.iterations(), 3);
  EXPECT_FALSE(r.converged);
  for (int k = 1; k < r.iterations(); ++k)
    for (int i = 0; i < s.size(); ++i) EXPECT_EQ(r.policy_weights[k][i], r.evaluated_weights[k - 1][i]);
}

TEST(PolicyIteration, ZeroStateCostRejected) {
  Scenario s = short_pi_benchmark();
  s.costs[0].q.setZero();
  EXPECT_THROW(run_policy_iteration(s), ValidationError);
}

TEST(PolicyIteration, DestabilizingPolicyIsInadmissible) {
  Scenario s = scalar_linear();
  s.mode = Mode::policy_iteration;
  s.integration.state_guard = 100.0;
  s.critics[0] = s.critics[0].with_weights(Eigen::VectorXd::Constant(1, -10.0));
  EXPECT_THROW(run_policy_iteration(s), InadmissiblePolicy);
}

TEST(PolicyIteration, NoExcitationIsReported) {
  Scenario s = consensus_start();
  s.mode = Mode::policy_iteration;
  s.integration.t_final = 1.0;
  EXPECT_THROW(run_policy_iteration(s), InsufficientExcitation);
}
