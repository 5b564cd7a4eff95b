#include "fadp/controller.hpp"
#include "fadp/errors.hpp"
#include "fadp/scenario_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fadp;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

AgentModel unit_input_agent() {
  AgentModel a;
  a.drift = PolynomialField::zero(1, 1);
  a.input_columns = {PolynomialField(1, {{{1.0, {0}}}})};
  return a;
}

CostSpec ring_cost(int i) {
  CostSpec c;
  c.q = Eigen::Matrix2d::Identity();
  c.r_self = scalar(8.5);
  c.r_neighbors[(i + 4) % 5] = scalar(0.1);
  return c;
}

struct RandomPoint {
  std::vector<Eigen::VectorXd> x, u;
  Eigen::VectorXd x0;
};

RandomPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  RandomPoint p;
  for (int j = 0; j < 5; ++j) {
    p.x.push_back(Eigen::Vector2d(d(rng), d(rng)));
    p.u.push_back(vec1(d(rng)));
  }
  p.x0 = Eigen::Vector2d(d(rng), d(rng));
  return p;
}

RunStats nominal_stats() {
  RunStats s;
  s.sigma_max = 1.0;
  s.q = 1.0;
  s.eps_bar = 0.0;
  s.drift_coupling_sq = 0.0;
  return s;
}

}  // namespace

TEST(CostRate, ZeroAtRest) {
  const std::vector<Eigen::VectorXd> us(5, vec1(0.0));
  EXPECT_EQ(cost_rate(ring_cost(0), Eigen::Vector2d::Zero(), 0, us), 0.0);
}

TEST(CostRate, HandValue) {
  std::vector<Eigen::VectorXd> us(5);
  us[0] = vec1(1.0);
  us[4] = vec1(1.0);
  EXPECT_NEAR(cost_rate(ring_cost(0), Eigen::Vector2d(1, 1), 0, us), 10.6, 1e-14);
}

TEST(CostRate, Quadratic) {
  std::vector<Eigen::VectorXd> us(5), doubled(5);
  us[0] = vec1(0.3);
  us[4] = vec1(-0.7);
  doubled[0] = 2.0 * us[0];
  doubled[4] = 2.0 * us[4];
  const Eigen::Vector2d e(0.2, -0.9);
  EXPECT_NEAR(cost_rate(ring_cost(0), 2.0 * e, 0, doubled), 4.0 * cost_rate(ring_cost(0), e, 0, us), 1e-13);
}

TEST(CostSpec, Validation) {
  const Network net = paper_benchmark().network;
  EXPECT_NO_THROW(ring_cost(2).validate(net, 2));
  CostSpec zero_q = ring_cost(2);
  zero_q.q.setZero();
  EXPECT_THROW(zero_q.validate(net, 2), ValidationError);
  CostSpec missing = ring_cost(2);
  missing.r_neighbors.clear();
  EXPECT_THROW(missing.validate(net, 2), ValidationError);
  CostSpec extra = ring_cost(2);
  extra.r_neighbors[3] = scalar(0.1);
  EXPECT_THROW(extra.validate(net, 2), ValidationError);
  CostSpec bad_r = ring_cost(2);
  bad_r.r_self = scalar(-1.0);
  EXPECT_THROW(bad_r.validate(net, 2), ValidationError);
}

TEST(Sigma, ZeroAtConsensusWithoutInput) {
  const Network net = paper_benchmark().network;
  const Eigen::Vector2d x0(0.4, -0.2);
  const std::vector<Eigen::VectorXd> xs(5, x0), us(5, vec1(0.0));
  const GfhmCritic c = GfhmCritic::identity(2, Eigen::Vector2d(1.0, 2.0));
  EXPECT_EQ(sigma_vector(c, net, 1, xs, x0, us), Eigen::Vector2d::Zero());
}

TEST(Sigma, ComposesGradientMatrixAndErrorRate) {
  std::mt19937_64 rng(8);
  const Network net = paper_benchmark().network;
  const GfhmCritic c({{-0.5, 0.5}, {0.0}}, Eigen::Vector3d(1.0, 0.7, 1.3), Eigen::Vector3d(0.2, -0.1, 0.4));
  for (int draw = 0; draw < 20; ++draw) {
    const RandomPoint p = random_point(rng);
    for (int i = 0; i < 5; ++i) {
      const Eigen::VectorXd e = consensus_error(net.graph, i, p.x, p.x0);
      const Eigen::VectorXd expected = c.gradient_matrix(e).transpose() * error_rate(net, i, p.x, p.x0, p.u);
      const Eigen::VectorXd s = sigma_vector(c, net, i, p.x, p.x0, p.u);
      EXPECT_LT((s - expected).norm(), 1e-14);
      EXPECT_EQ(s, sigma_vector(c.with_weights(Eigen::Vector3d(9.0, 8.0, -7.0)), net, i, p.x, p.x0, p.u));
    }
  }
}

TEST(Residual, ZeroAtRest) {
  const Network net = paper_benchmark().network;
  const Eigen::Vector2d x0(0.4, -0.2);
  const std::vector<Eigen::VectorXd> xs(5, x0), us(5, vec1(0.0));
  const GfhmCritic c = GfhmCritic::identity(2, Eigen::Vector2d(3.0, -2.0));
  EXPECT_EQ(hamiltonian_residual(c, ring_cost(3), net, 3, xs, x0, us), 0.0);
}

TEST(Residual, DecomposesIntoCostAndSigma) {
  std::mt19937_64 rng(9);
  const Network net = paper_benchmark().network;
  const GfhmCritic c = GfhmCritic::identity(2, Eigen::Vector2d(0.6, -1.1));
  for (int draw = 0; draw < 20; ++draw) {
    const RandomPoint p = random_point(rng);
    for (int i = 0; i < 5; ++i) {
      const Eigen::VectorXd e = consensus_error(net.graph, i, p.x, p.x0);
      const double res = hamiltonian_residual(c, ring_cost(i), net, i, p.x, p.x0, p.u);
      const double theta_sigma = c.weights().dot(sigma_vector(c, net, i, p.x, p.x0, p.u));
      EXPECT_NEAR(res - cost_rate(ring_cost(i), e, i, p.u), theta_sigma, 1e-13);
    }
  }
}

TEST(Residual, LeastSquaresWeightsMinimizeMeanSquare) {
  std::mt19937_64 rng(10);
  const Network net = paper_benchmark().network;
  const int i = 2;
  const GfhmCritic base = GfhmCritic::identity(2);
  std::vector<RandomPoint> points;
  std::vector<RegressionSample> samples;
  for (int k = 0; k < 40; ++k) {
    points.push_back(random_point(rng));
    const auto& p = points.back();
    const Eigen::VectorXd e = consensus_error(net.graph, i, p.x, p.x0);
    samples.push_back({sigma_vector(base, net, i, p.x, p.x0, p.u), cost_rate(ring_cost(i), e, i, p.u)});
  }
  const Eigen::VectorXd best = policy_evaluation_lsq(samples);
  auto mean_sq = [&](const Eigen::VectorXd& w) {
    const GfhmCritic c = base.with_weights(w);
    double acc = 0.0;
    for (const auto& p : points) {
      const double r = hamiltonian_residual(c, ring_cost(i), net, i, p.x, p.x0, p.u);
      acc += r * r;
    }
    return acc / static_cast<double>(points.size());
  };
  const double floor = mean_sq(best);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Vector2d w = best + Eigen::Vector2d(n(rng), n(rng));
    EXPECT_GE(mean_sq(w), floor - 1e-12);
  }
}

TEST(WeightUpdate, TrivialCases) {
  const Eigen::Vector2d w(2.0, 3.0);
  EXPECT_EQ(weight_update_rate(0.1, w, Eigen::Vector2d::Zero(), 0.5), Eigen::Vector2d::Zero());
  EXPECT_EQ(weight_update_rate(0.0, w, Eigen::Vector2d(1.0, 0.0), 0.5), Eigen::Vector2d::Zero());
}

TEST(WeightUpdate, HandValue) {
  const Eigen::VectorXd rate = weight_update_rate(0.1, Eigen::Vector2d(2.0, 3.0), Eigen::Vector2d(1.0, 0.0), 0.5);
  EXPECT_NEAR(rate(0), -0.25, 1e-15);
  EXPECT_EQ(rate(1), 0.0);
}

TEST(ControlLaw, ZeroWeights) {
  const Network net = paper_benchmark().network;
  const GfhmCritic c = GfhmCritic::identity(2);
  EXPECT_EQ(control_law(c, net.agents[0], net.graph, 0, Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(0.1, 0.2),
                        ring_cost(0)),
            vec1(0.0));
}

TEST(ControlLaw, ZeroInputMap) {
  const Network net = paper_benchmark().network;
  const GfhmCritic c = GfhmCritic::identity(2, Eigen::Vector2d(1.0, 1.0));
  // g = (0, c x2^2) vanishes on x2 = 0.
  EXPECT_EQ(control_law(c, net.agents[2], net.graph, 2, Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(0.1, 0.2),
                        ring_cost(2))(0),
            0.0);
}

TEST(ControlLaw, ScalarHandValue) {
  const DiGraph g(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 2.0));
  CostSpec spec;
  spec.q = scalar(1.0);
  spec.r_self = scalar(8.5);
  const GfhmCritic c = GfhmCritic::identity(1, vec1(1.7));
  const Eigen::VectorXd u = control_law(c, unit_input_agent(), g, 0, vec1(0.0), vec1(0.0), spec);
  EXPECT_NEAR(u(0), -0.2, 1e-15);
}

TEST(ControlLaw, LinearInWeights) {
  const Network net = paper_benchmark().network;
  const Eigen::Vector2d x(0.3, -0.6), e(0.2, 0.5), w1(0.4, -1.0), w2(-2.0, 0.3);
  const GfhmCritic c = GfhmCritic::identity(2);
  auto u = [&](const Eigen::Vector2d& w) {
    return control_law(c.with_weights(w), net.agents[2], net.graph, 2, x, e, ring_cost(2));
  };
  EXPECT_LT((u(2.0 * w1 + 3.0 * w2) - (2.0 * u(w1) + 3.0 * u(w2))).norm(), 1e-15);
}

TEST(Probing, ZeroAmplitude) {
  ProbingSpec p;
  p.channels = {{{0.0, 1.0, 0.3}, {0.0, 2.0, 0.0}}};
  EXPECT_EQ(probing_signal(p, 1.234)(0), 0.0);
}

TEST(Probing, SilentAfterCutoff) {
  ProbingSpec p;
  p.channels = {{{0.5, 1.0, 0.3}}};
  p.cutoff = 4.0;
  EXPECT_NE(probing_signal(p, 3.9)(0), 0.0);
  EXPECT_EQ(probing_signal(p, 4.0)(0), 0.0);
  EXPECT_EQ(probing_signal(p, 100.0)(0), 0.0);
}

TEST(Probing, SinusoidPeak) {
  ProbingSpec p;
  const double a = 0.3, w = 2.5;
  p.channels = {{{a, w, 0.0}}};
  EXPECT_NEAR(probing_signal(p, std::numbers::pi / (2.0 * w))(0), a, 1e-15);
}

TEST(LearnerGains, FrequencyCount) {
  LearnerGains g;
  g.probing.channels = {{{0.1, 1.0, 0.0}}};
  EXPECT_THROW(g.validate(4, 1), ValidationError);
  g.probing.channels = {{{0.1, 1.0, 0.0}, {0.1, 1.0, 0.5}}};
  EXPECT_THROW(g.validate(4, 1), ValidationError);
  g.probing.channels = {{{0.1, 1.0, 0.0}, {0.1, 2.0, 0.5}}};
  EXPECT_NO_THROW(g.validate(4, 1));
  g.adaptation = -0.1;
  EXPECT_THROW(g.validate(4, 1), ValidationError);
}

TEST(GainCheck, AdaptationRange) {
  const Network net = paper_benchmark().network;
  const std::vector<double> betas{1.0, 1.5, 0.2, 0.3, 0.9};
  LearnerGains g;
  g.adaptation = 0.1;
  EXPECT_TRUE(gain_check(g, ring_cost(2), net.graph, 2, betas, nominal_stats()).adaptation_in_range);
  g.adaptation = 2.5;
  const GainReport r = gain_check(g, ring_cost(2), net.graph, 2, betas, nominal_stats());
  EXPECT_FALSE(r.adaptation_in_range);
  EXPECT_FALSE(r.passed());
}

TEST(GainCheck, GammaZeroFails) {
  const Network net = paper_benchmark().network;
  const std::vector<double> betas{1.0, 1.5, 0.2, 0.3, 0.9};
  LearnerGains g;
  g.gamma = 0.0;
  const GainReport r = gain_check(g, ring_cost(2), net.graph, 2, betas, nominal_stats());
  EXPECT_FALSE(r.gamma_ok);
  EXPECT_FALSE(r.passed());
  // N_i = 1, lambda_min(Q) = 1; input terms (2 * 0.2)^2 / 17 and 1.5^2 / 0.2.
  EXPECT_NEAR(r.gamma_threshold, 1.5 * 1.5 / 0.2, 1e-12);
}

TEST(GainCheck, MissingStatistics) {
  const Network net = paper_benchmark().network;
  const std::vector<double> betas{1.0, 1.5, 0.2, 0.3, 0.9};
  RunStats s = nominal_stats();
  s.q = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gain_check(LearnerGains{}, ring_cost(2), net.graph, 2, betas, s), ValidationError);
  EXPECT_THROW(gain_check(LearnerGains{}, ring_cost(2), net.graph, 2, std::vector<double>{1.0}, nominal_stats()),
               ValidationError);
}

TEST(UubBounds, ZeroNumerator) {
  const Network net = paper_benchmark().network;
  const UubBounds b = uub_bounds(nominal_stats(), LearnerGains{}, ring_cost(2), net.graph, 2);
  EXPECT_EQ(b.weight_error, 0.0);
  EXPECT_EQ(b.consensus_error, 0.0);
}

TEST(UubBounds, IncreaseWithResidualBound) {
  const Network net = paper_benchmark().network;
  RunStats s = nominal_stats();
  s.drift_coupling_sq = 0.2;
  double prev_theta = -1.0, prev_e = -1.0;
  for (double eps : {0.0, 0.01, 0.1, 0.5, 2.0}) {
    s.eps_bar = eps;
    const UubBounds b = uub_bounds(s, LearnerGains{}, ring_cost(2), net.graph, 2);
    EXPECT_GT(b.weight_error, prev_theta);
    EXPECT_GT(b.consensus_error, prev_e);
    prev_theta = b.weight_error;
    prev_e = b.consensus_error;
  }
}

TEST(UubBounds, HandValue) {
  const Network net = paper_benchmark().network;
  RunStats s = nominal_stats();
  s.drift_coupling_sq = 0.3;
  s.eps_bar = 0.2;
  LearnerGains g;
  g.adaptation = 0.1;
  g.gamma = 10.0;
  const UubBounds b = uub_bounds(s, g, ring_cost(2), net.graph, 2);
  const double num = 0.3 + 0.04 / 0.2;
  EXPECT_NEAR(b.weight_error, std::sqrt(num / (1.0 - 0.05)), 1e-14);
  EXPECT_NEAR(b.consensus_error, std::sqrt(num / (20.0 - 4.0)), 1e-14);
}

TEST(UubBounds, NonPositiveDenominator) {
  const Network net = paper_benchmark().network;
  RunStats s = nominal_stats();
  s.q = 0.01;
  EXPECT_THROW(uub_bounds(s, LearnerGains{}, ring_cost(2), net.graph, 2), GainConditionError);
  LearnerGains g;
  g.gamma = 1.0;
  EXPECT_THROW(uub_bounds(nominal_stats(), g, ring_cost(2), net.graph, 2), GainConditionError);
}

TEST(Lsq, RecoversGeneratingWeights) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Vector4d truth(0.5, -1.25, 3.0, 0.01);
  std::vector<RegressionSample> samples;
  for (int k = 0; k < 30; ++k) {
    const Eigen::Vector4d s(n(rng), n(rng), n(rng), n(rng));
    samples.push_back({s, -s.dot(truth)});
  }
  EXPECT_LT((policy_evaluation_lsq(samples) - truth).norm(), 1e-10);
}

TEST(Lsq, DuplicatedSamplesSameSolution) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<RegressionSample> samples;
  for (int k = 0; k < 10; ++k) samples.push_back({Eigen::Vector3d(n(rng), n(rng), n(rng)), n(rng)});
  std::vector<RegressionSample> doubled = samples;
  doubled.insert(doubled.end(), samples.begin(), samples.end());
  EXPECT_LT((policy_evaluation_lsq(samples) - policy_evaluation_lsq(doubled)).norm(), 1e-12);
}

TEST(Lsq, TooFewSamples) {
  const std::vector<RegressionSample> samples{{Eigen::Vector3d(1, 0, 0), 1.0}, {Eigen::Vector3d(0, 1, 0), 1.0}};
  EXPECT_THROW(policy_evaluation_lsq(samples), InsufficientExcitation);
}

TEST(Lsq, RankDeficient) {
  std::vector<RegressionSample> samples;
  for (int k = 0; k < 10; ++k) samples.push_back({Eigen::Vector2d(k, 2.0 * k), 1.0});
  EXPECT_THROW(policy_evaluation_lsq(samples), InsufficientExcitation);
  EXPECT_TRUE(std::isinf(gram_condition_number(samples)) || gram_condition_number(samples) > 1e12);
}
