#include "fadp/errors.hpp"
#include "fadp/scenario_io.hpp"
#include "fadp/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace fadp;

namespace {

Scenario short_benchmark(double t_final) {
  Scenario s = paper_benchmark();
  s.integration.t_final = t_final;
  return s;
}

TrajectoryLog constant_cost_log(double c, double t_final, double h) {
  TrajectoryLog log;
  const auto steps = std::llround(t_final / h);
  for (long k = 0; k <= steps; ++k) {
    log.t.push_back(static_cast<double>(k) * h);
    log.x.push_back({Eigen::VectorXd::Zero(1)});
    log.cost.push_back({c});
  }
  return log;
}

}  // namespace

TEST(Rk4, ZeroDerivative) {
  const OdeField f = [](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(Eigen::VectorXd::Zero(y.size())); };
  const Eigen::Vector3d y(1.0, -2.0, 0.5);
  EXPECT_EQ(rk4_step(f, 0.0, y, 0.1), Eigen::VectorXd(y));
}

TEST(Rk4, ConstantDerivative) {
  const Eigen::Vector2d c(3.0, -0.7);
  const OdeField f = [&](double, const Eigen::VectorXd&) { return Eigen::VectorXd(c); };
  const Eigen::Vector2d y(1.0, 2.0);
  const double h = 0.01;
  EXPECT_EQ(rk4_step(f, 0.0, y, h), Eigen::VectorXd(y + h * c));
}

TEST(Rk4, ExponentialDecay) {
  const OdeField f = [](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(-y); };
  const double h = 0.01;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd next = rk4_step(f, k * h, y, h);
    EXPECT_LT(std::abs(next(0) - std::exp(-h) * y(0)), 1e-10);
    y = next;
  }
}

TEST(Rk4, NonFiniteDerivativeThrows) {
  const OdeField f = [](double, const Eigen::VectorXd& y) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(y.size(), std::nan("")));
  };
  EXPECT_THROW(rk4_step(f, 0.0, Eigen::VectorXd::Zero(2), 0.1), NumericalBlowUp);
}

TEST(Convergence, ConstantSeries) {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> w;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.1 * k);
    w.push_back(Eigen::Vector2d(1.0, -2.0));
  }
  const auto c = detect_convergence(t, w, 2.0, 1e-3);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, 2.0, 1e-12);
}

TEST(Convergence, LinearSeriesNever) {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> w;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.1 * k);
    w.push_back(Eigen::VectorXd::Constant(1, 0.5 * t.back()));
  }
  EXPECT_FALSE(detect_convergence(t, w, 2.0, 1e-3).has_value());
}

TEST(Convergence, SettlesAfterTransient) {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> w;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(0.05 * k);
    w.push_back(Eigen::VectorXd::Constant(1, std::min(t.back(), 3.0)));
  }
  const auto c = detect_convergence(t, w, 2.0, 1e-3);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, 5.0, 1e-9);
}

TEST(CostIntegral, ZeroAndConstant) {
  EXPECT_EQ(cost_integral(constant_cost_log(0.0, 3.0, 0.01), 0), 0.0);
  EXPECT_NEAR(cost_integral(constant_cost_log(2.5, 4.0, 0.01), 0), 10.0, 1e-12);
}

TEST(CostIntegral, StepRefinement) {
  Scenario coarse = short_benchmark(20.0);
  Scenario fine = coarse;
  fine.integration.step = coarse.integration.step / 2.0;
  const TrajectoryLog a = simulate(coarse);
  const TrajectoryLog b = simulate(fine);
  for (int i = 0; i < coarse.size(); ++i) {
    const double ja = cost_integral(a, i), jb = cost_integral(b, i);
    EXPECT_LT(std::abs(ja - jb) / jb, 1e-3) << "agent " << i + 1;
  }
}

TEST(Simulate, AccumulatedCostNondecreasing) {
  const TrajectoryLog log = simulate(short_benchmark(2.0));
  for (std::size_t k = 1; k < log.length(); ++k)
    for (int i = 0; i < log.agents(); ++i) EXPECT_GE(log.accumulated_cost[k][i], log.accumulated_cost[k - 1][i]);
  EXPECT_NEAR(log.accumulated_cost.back()[0], cost_integral(log, 0), 1e-12);
}

TEST(Simulate, ZeroAdaptationFreezesWeights) {
  Scenario s = short_benchmark(3.0);
  for (auto& g : s.gains) g.adaptation = 0.0;
  s.critics[0] = s.critics[0].with_weights(Eigen::Vector2d(0.3, -0.2));
  const TrajectoryLog log = simulate(s);
  for (const auto& row : log.weights)
    for (int i = 0; i < s.size(); ++i) EXPECT_EQ(row[i], s.critics[i].weights());
}

TEST(Simulate, ConsensusStartStaysOnManifold) {
  const Scenario s = consensus_start();
  const TrajectoryLog log = simulate(s);
  for (std::size_t k = 0; k < log.length(); ++k) {
    for (int i = 0; i < s.size(); ++i) {
      EXPECT_LT(log.e[k][i].norm(), 1e-8);
      EXPECT_LT((log.x[k][i] - log.leader[k]).norm(), 1e-8);
    }
  }
}

TEST(Simulate, ScalarClosedLoopMatchesAnalytic) {
  const Scenario s = scalar_linear();
  const double gain = 1.0 + std::sqrt(2.0);
  RunOptions opt;
  opt.policy = [gain](int, double, const Eigen::VectorXd&, const Eigen::VectorXd& e) {
    return Eigen::VectorXd(-gain * e);
  };
  const TrajectoryLog log = simulate(s, opt);
  const double x0 = s.initial_states[0](0);
  for (std::size_t k = 0; k < log.length(); k += 500) {
    EXPECT_NEAR(log.x[k][0](0), x0 * std::exp(-std::sqrt(2.0) * log.t[k]), 1e-10);
  }
}

TEST(Simulate, Deterministic) {
  const Scenario s = short_benchmark(3.0);
  std::ostringstream a, b;
  write_trajectory_csv(a, simulate(s), 10);
  write_trajectory_csv(b, simulate(s), 10);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Simulate, SeedChangesProbingPhases) {
  Scenario s = short_benchmark(1.0);
  Scenario other = s;
  other.seed = s.seed + 1;
  std::ostringstream a, b;
  write_trajectory_csv(a, simulate(s), 10);
  write_trajectory_csv(b, simulate(other), 10);
  EXPECT_NE(a.str(), b.str());
}

TEST(Simulate, BlowUpGuard) {
  Scenario s = scalar_linear();
  s.integration.state_guard = 10.0;
  RunOptions opt;
  opt.policy = [](int, double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(1));
  };
  try {
    simulate(s, opt);
    FAIL() << "expected NumericalBlowUp";
  } catch (const NumericalBlowUp& err) {
    EXPECT_NEAR(err.time(), std::log(20.0), 2e-3);
  }
}

TEST(Simulate, ControlOffsetIsApplied) {
  Scenario s = scalar_linear();
  s.integration.t_final = 1.0;
  const TrajectoryLog base = simulate(s);
  RunOptions opt;
  opt.offset = ControlOffset{0, Eigen::VectorXd::Constant(1, 0.25)};
  const TrajectoryLog pert = simulate(s, opt);
  EXPECT_NEAR(pert.u[0][0](0) - base.u[0][0](0), 0.25, 1e-15);
}

TEST(ProbingPhases, DrawnFromSeed) {
  Scenario a = paper_benchmark();
  Scenario b = paper_benchmark();
  a.gains[0].probing.channels[0][0].phase = 0.75;
  b.gains[0].probing.channels[0][0].phase = 0.75;
  resolve_probing_phases(a);
  resolve_probing_phases(b);
  EXPECT_EQ(a.gains[0].probing.channels[0][0].phase, 0.75);
  for (int i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a.gains[i].probing.channels[0].size(); ++k) {
      const double p = a.gains[i].probing.channels[0][k].phase;
      EXPECT_TRUE(std::isfinite(p));
      EXPECT_GE(p, 0.0);
      EXPECT_LT(p, 2.0 * M_PI);
      EXPECT_EQ(p, b.gains[i].probing.channels[0][k].phase);
    }
  }
}

TEST(ScenarioValidation, Rejects) {
  Scenario s = paper_benchmark();
  s.integration.step = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = paper_benchmark();
  s.integration.t_final = s.integration.step / 2.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = paper_benchmark();
  s.initial_states.pop_back();
  EXPECT_THROW(s.validate(), ValidationError);
  s = paper_benchmark();
  s.costs[1].q.setZero();
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(TrajectoryCsv, HeaderAndRoundTrip) {
  const Scenario s = short_benchmark(1.0);
  const TrajectoryLog log = simulate(s);
  std::ostringstream out;
  write_trajectory_csv(out, log, 10);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("t,x1_1,x1_2,e1_1,e1_2,u1_1,r1,J1,theta1_1,theta1_2,residual1,x2_1", 0), 0u);
  std::istringstream in(text);
  const TrajectoryLog back = read_trajectory_csv(in, s);
  ASSERT_EQ(back.length(), 101u);
  for (std::size_t k = 0; k < back.length(); ++k) {
    const std::size_t src = k * 10;
    EXPECT_EQ(back.t[k], log.t[src]);
    for (int i = 0; i < s.size(); ++i) {
      EXPECT_EQ(back.x[k][i], log.x[src][i]);
      EXPECT_EQ(back.e[k][i], log.e[src][i]);
      EXPECT_EQ(back.u[k][i], log.u[src][i]);
      EXPECT_EQ(back.weights[k][i], log.weights[src][i]);
      EXPECT_EQ(back.cost[k][i], log.cost[src][i]);
      EXPECT_EQ(back.residual[k][i], log.residual[src][i]);
      EXPECT_LT((back.sigma[k][i] - log.sigma[src][i]).norm(), 1e-12 * (1.0 + log.sigma[src][i].norm()));
    }
    EXPECT_EQ(back.leader[k], log.leader[src]);
  }
}

TEST(TrajectoryCsv, LastRowAlwaysWritten) {
  Scenario s = short_benchmark(1.0);
  s.integration.step = 0.01;
  const TrajectoryLog log = simulate(s);
  std::ostringstream out;
  write_trajectory_csv(out, log, 7);
  std::istringstream in(out.str());
  const TrajectoryLog back = read_trajectory_csv(in, s);
  EXPECT_EQ(back.t.back(), log.t.back());
}

TEST(Summary, ReportsDiagnostics) {
  const Scenario s = short_benchmark(4.0);
  const TrajectoryLog log = simulate(s);
  const RunSummary sum = summarize(s, log, 2.0);
  ASSERT_EQ(sum.agents.size(), 5u);
  EXPECT_GT(sum.max_initial_error, 0.0);
  std::ostringstream out;
  write_summary(out, s, sum);
  const std::string text = out.str();
  for (const char* key : {"convergence_time", "max_final_error_norm", "agent.1.gain_check", "agent.1.bound", "tail_error_sup"})
    EXPECT_NE(text.find(key), std::string::npos) << key;
}
