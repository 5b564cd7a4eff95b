#include "fadp/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "fadp/errors.hpp"
#include "fadp/scenario_io.hpp"

namespace fadp {

namespace {

// Uniform on [lo, hi) from the raw engine output; stable across standard libraries.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = uniform(rng, lo, hi);
  return v;
}

CheckReport make(std::string name, bool ok, double measured, double tol, std::string context = {}) {
  return {std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, measured, tol, std::move(context)};
}

DiGraph random_graph(std::mt19937_64& rng, int n, bool integer_weights) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || uniform(rng, 0, 1) < 0.5) continue;
      a(i, j) = integer_weights ? static_cast<double>(uniform_int(rng, 1, 9)) : uniform(rng, 0.01, 3.0);
    }
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (uniform(rng, 0, 1) < 0.4) b(i) = integer_weights ? uniform_int(rng, 1, 3) : uniform(rng, 0.1, 2.0);
  }
  b(uniform_int(rng, 0, n - 1)) = 1.0;
  return DiGraph(std::move(a), std::move(b));
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const CheckReport& r) {
  const char* tag = r.status == CheckStatus::pass ? "PASS" : r.status == CheckStatus::fail ? "FAIL" : "INCONCLUSIVE";
  os << std::left << std::setw(13) << tag << std::setw(34) << r.name << " measured=" << std::setprecision(6)
     << r.measured << " tolerance=" << r.tolerance;
  if (!r.context.empty()) os << "  [" << r.context << "]";
  return os;
}

CheckReport check_appendix_a(const Network& net, int i, States states, const Eigen::VectorXd& leader_state,
                             States controls, const Eigen::VectorXd& probe, double rel_tol) {
  const double local = probe.dot(error_rate(net, i, states, leader_state, controls));
  const double full = probe.dot(contracted_error_rate(net, i, states, leader_state, controls));
  double scale = 0.0;
  const Eigen::RowVectorXd row = net.graph.coupling_row(i);
  for (int j = 0; j < net.size(); ++j) {
    const Eigen::VectorXd term = drift_mismatch(net, j, states[j], leader_state) +
                                 net.agents[j].input_matrix(states[j]) * controls[j];
    scale += std::abs(row(j)) * std::abs(probe.dot(term));
  }
  const double gap = std::abs(local - full);
  const double measured = scale > 0.0 ? gap / scale : gap;
  return make("appendix_a_identity", gap <= rel_tol * scale, measured, rel_tol);
}

CheckReport check_appendix_a_random(std::uint64_t seed, int draws, double rel_tol) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  int failures = 0;
  for (int d = 0; d < draws; ++d) {
    const int n_agents = uniform_int(rng, 2, 7);
    std::vector<AgentModel> agents;
    for (int j = 0; j < n_agents; ++j) agents.push_back(benchmark_agent(uniform(rng, -2, 2), "", 4.0));
    Network net{random_graph(rng, n_agents, false), std::move(agents), benchmark_drift(), ""};
    std::vector<Eigen::VectorXd> states, controls;
    for (int j = 0; j < n_agents; ++j) {
      states.push_back(random_vector(rng, 2, -1, 1));
      controls.push_back(random_vector(rng, 1, -2, 2));
    }
    const Eigen::VectorXd leader = random_vector(rng, 2, -1, 1);
    const Eigen::VectorXd probe = random_vector(rng, 2, -1, 1);
    const int i = uniform_int(rng, 0, n_agents - 1);
    const CheckReport r = check_appendix_a(net, i, states, leader, controls, probe, rel_tol);
    worst = std::max(worst, r.measured);
    if (!r.passed()) ++failures;
  }
  return make("appendix_a_identity", failures == 0, worst, rel_tol,
              std::to_string(draws) + " random draws, seed " + std::to_string(seed) + ", " +
                  std::to_string(failures) + " failed");
}

CheckReport check_laplacian_rows(std::uint64_t seed, int graphs) {
  std::mt19937_64 rng(seed);
  double worst_int = 0.0, worst_real = 0.0;
  for (int k = 0; k < graphs; ++k) {
    const int n = uniform_int(rng, 1, 12);
    const Eigen::MatrixXd li = random_graph(rng, n, true).laplacian();
    worst_int = std::max(worst_int, li.rowwise().sum().cwiseAbs().maxCoeff());
    const Eigen::MatrixXd lr = random_graph(rng, n, false).laplacian();
    worst_real = std::max(worst_real, lr.rowwise().sum().cwiseAbs().maxCoeff());
  }
  std::ostringstream ctx;
  ctx << graphs << " integer + " << graphs << " real graphs; integer max |row sum| = " << worst_int;
  return make("laplacian_row_sums", worst_int == 0.0 && worst_real < 1e-12, worst_real, 1e-12, ctx.str());
}

CheckReport check_gradient_fidelity(std::uint64_t seed, int draws, double h, double rel_tol) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int d = 0; d < draws; ++d) {
    const int n = uniform_int(rng, 1, 4);
    std::vector<std::vector<double>> trans(n);
    for (auto& t : trans) {
      const int w = uniform_int(rng, 1, 3);
      for (int k = 0; k < w; ++k) t.push_back(uniform(rng, -0.5, 0.5));
    }
    Eigen::Index m = 0;
    for (const auto& t : trans) m += static_cast<Eigen::Index>(t.size());
    const GfhmCritic critic(trans, random_vector(rng, m, 0.5, 1.5), random_vector(rng, m, -3, 3));
    const Eigen::VectorXd e = random_vector(rng, n, -1.5, 1.5);
    const Eigen::VectorXd analytic = critic.value_gradient(e);
    const Eigen::MatrixXd lambda = critic.gradient_matrix(e);
    for (int z = 0; z < n; ++z) {
      Eigen::VectorXd up = e, down = e;
      up(z) += h;
      down(z) -= h;
      const double fd = (critic.value(up) - critic.value(down)) / (2.0 * h);
      const double scale = (lambda.row(z).transpose().cwiseProduct(critic.weights())).cwiseAbs().sum();
      worst = std::max(worst, std::abs(fd - analytic(z)) / std::max(scale, 1e-300));
    }
  }
  return make("gradient_fidelity", worst < rel_tol, worst, rel_tol,
              std::to_string(draws) + " random critics, central differences h = 1e-5");
}

std::vector<std::vector<RegressionSample>> random_regression_datasets(std::uint64_t seed, int datasets, int m,
                                                                      int count) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<RegressionSample>> out;
  while (static_cast<int>(out.size()) < datasets) {
    std::vector<RegressionSample> data;
    for (int k = 0; k < count; ++k) data.push_back({random_vector(rng, m, -1, 1), uniform(rng, 0, 2)});
    if (gram_condition_number(data) < 1e3) out.push_back(std::move(data));
  }
  return out;
}

CheckReport check_lsq_vs_gradient_flow(std::span<const RegressionSample> samples, double adaptation,
                                       const Eigen::VectorXd& start, double rel_tol) {
  const double cond = gram_condition_number(samples);
  if (!(cond < 1e6)) {
    return {"lsq_vs_gradient_flow", CheckStatus::inconclusive, cond, 1e6, "insufficient excitation"};
  }
  const Eigen::VectorXd target = policy_evaluation_lsq(samples);
  const double k = static_cast<double>(samples.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(start.size(), start.size());
  for (const auto& s : samples) gram += s.sigma * s.sigma.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double rate_min = adaptation * eig.eigenvalues()(0) / k;
  const double rate_max = adaptation * eig.eigenvalues()(eig.eigenvalues().size() - 1) / k;

  const OdeField flow = [&](double, const Eigen::VectorXd& theta) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(theta.size());
    for (const auto& s : samples) d += weight_update_rate(adaptation, theta, s.sigma, s.cost);
    return Eigen::VectorXd(d / k);
  };
  const double h = 1.0 / rate_max;
  Eigen::VectorXd theta = start;
  long steps = 0;
  for (; steps < 100'000'000; ++steps) {
    const Eigen::VectorXd d = flow(0.0, theta);
    // ||theta - theta*|| <= ||theta'|| / rate_min for this linear flow.
    if (d.norm() / rate_min <= 1e-6 * std::max(theta.norm(), 1e-12)) break;
    theta = rk4_step(flow, steps * h, theta, h);
  }
  const double rel = (theta - target).norm() / std::max(target.norm(), 1e-300);
  std::ostringstream ctx;
  ctx << "cond = " << cond << ", " << steps << " RK4 steps";
  return make("lsq_vs_gradient_flow", rel < rel_tol, rel, rel_tol, ctx.str());
}

namespace {

CheckReport nash_impl(const Scenario& scenario, RunOptions base_opt, std::span<const double> offsets, double slack) {
  base_opt.adapt = false;
  base_opt.probing = false;
  TrajectoryLog base;
  try {
    base = simulate(scenario, base_opt);
  } catch (const NumericalBlowUp& err) {
    return {"nash_perturbation", CheckStatus::inconclusive, 0.0, slack, std::string("baseline: ") + err.what()};
  }
  double worst = std::numeric_limits<double>::infinity();
  std::ostringstream ctx;
  ctx << std::setprecision(4);
  bool inconclusive = false;
  for (int i = 0; i < scenario.size(); ++i) {
    const double j_base = cost_integral(base, i);
    // Exponential tail estimate of the truncated infinite-horizon cost.
    const std::size_t last = base.length() - 1;
    const std::size_t mid = last / 2;
    const double r_end = base.cost[last][i], r_mid = base.cost[mid][i];
    const double span = base.t[last] - base.t[mid];
    const double decay = (r_end > 0.0 && r_mid > r_end) ? std::log(r_mid / r_end) / span : 0.0;
    const double tail = decay > 0.0 ? r_end / decay : std::numeric_limits<double>::infinity();
    ctx << "J" << i + 1 << "=" << j_base << " (tail<=" << tail << ") ";
    for (double delta : offsets) {
      RunOptions opt = base_opt;
      opt.offset = ControlOffset{i, Eigen::VectorXd::Constant(scenario.network.agents[i].input_dim(), delta)};
      try {
        const TrajectoryLog pert = simulate(scenario, opt);
        const double j_pert = cost_integral(pert, i);
        const double rel = j_base > 0.0 ? (j_pert - j_base) / j_base : j_pert - j_base;
        worst = std::min(worst, rel);
      } catch (const NumericalBlowUp&) {
        inconclusive = true;
      }
    }
  }
  if (inconclusive) {
    return {"nash_perturbation", CheckStatus::inconclusive, worst, slack, ctx.str() + "perturbed run blew up"};
  }
  return make("nash_perturbation", worst >= -slack, worst, slack, ctx.str());
}

}  // namespace

CheckReport check_nash_perturbation(const Scenario& scenario, const std::vector<Eigen::VectorXd>& weights,
                                    std::span<const double> offsets, double slack) {
  RunOptions opt;
  opt.initial_weights = weights;
  return nash_impl(scenario, opt, offsets, slack);
}

CheckReport check_nash_perturbation(const Scenario& scenario, const PolicyFn& policy,
                                    std::span<const double> offsets, double slack) {
  RunOptions opt;
  opt.policy = policy;
  return nash_impl(scenario, opt, offsets, slack);
}

CheckReport check_lyapunov_decrease(const Scenario& scenario, const TrajectoryLog& log,
                                    const std::vector<Eigen::VectorXd>& weights, double from_time,
                                    double abs_tol) {
  double worst = 0.0;
  for (int i = 0; i < scenario.size(); ++i) {
    const GfhmCritic critic = scenario.critics[i].with_weights(weights[i]);
    // W(t) = V(t) - int |residual|; any rise of W is an excess over the band.
    double band = 0.0;
    double w_min = std::numeric_limits<double>::infinity();
    bool started = false;
    for (std::size_t k = 0; k < log.length(); ++k) {
      if (log.t[k] < from_time) continue;
      if (started) band += 0.5 * (log.t[k] - log.t[k - 1]) * (std::abs(log.residual[k - 1][i]) + std::abs(log.residual[k][i]));
      started = true;
      const double w = critic.value(log.e[k][i]) - band;
      w_min = std::min(w_min, w);
      worst = std::max(worst, w - w_min);
    }
  }
  std::ostringstream ctx;
  ctx << "tail from t = " << from_time;
  return make("lyapunov_decrease", worst <= abs_tol, worst, abs_tol, ctx.str());
}

CheckReport check_pi_monotonicity(const PolicyIterationResult& result, double band) {
  double worst = 0.0;
  for (int k = 1; k < result.iterations(); ++k) {
    const auto& prev = result.probe_values[k - 1];
    const auto& cur = result.probe_values[k];
    for (std::size_t i = 0; i < cur.size(); ++i) {
      double scale = 0.0;
      for (double v : prev[i]) scale = std::max(scale, std::abs(v));
      for (std::size_t p = 0; p < cur[i].size(); ++p) {
        const double rise = cur[i][p] - prev[i][p];
        worst = std::max(worst, scale > 0.0 ? rise / scale : (rise > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
      }
    }
  }
  std::ostringstream ctx;
  ctx << result.iterations() << " iterations, " << (result.converged ? "converged" : "not converged");
  return make("pi_value_monotonicity", worst <= band, worst, band, ctx.str());
}

std::vector<CheckReport> run_verification_suite(std::uint64_t seed) {
  std::vector<CheckReport> out;
  out.push_back(check_laplacian_rows(seed, 100));
  out.push_back(check_appendix_a_random(seed, 100));
  out.push_back(check_gradient_fidelity(seed, 100));

  {
    const auto sets = random_regression_datasets(seed, 20, 4, 20);
    double worst = 0.0;
    int failed = 0;
    for (const auto& d : sets) {
      const auto r = check_lsq_vs_gradient_flow(d, 0.1, Eigen::VectorXd::Zero(4));
      worst = std::max(worst, r.measured);
      if (!r.passed()) ++failed;
    }
    out.push_back(make("lsq_vs_gradient_flow", failed == 0, worst, 1e-3,
                       "20 random datasets, m = 4, 20 samples; " + std::to_string(failed) + " failed"));
  }

  const Scenario bench = paper_benchmark();
  const TrajectoryLog log = simulate(bench);
  const RunSummary summary = summarize(bench, log);
  out.push_back(make("benchmark_weight_convergence", summary.convergence_time && *summary.convergence_time <= 12.0,
                     summary.convergence_time.value_or(std::numeric_limits<double>::infinity()), 12.0,
                     "seconds; window 2 s, drift < 1e-3 / s"));
  {
    const auto k18 = static_cast<std::size_t>(std::llround(18.0 / bench.integration.step));
    double e18 = 0.0;
    for (const auto& e : log.e[k18]) e18 = std::max(e18, e.norm());
    const double ratio = e18 / summary.max_initial_error;
    out.push_back(make("benchmark_consensus_at_18s", ratio <= 0.05, ratio, 0.05, "max_i ||e_i(18)|| / max_i ||e_i(0)||"));
    out.push_back(make("benchmark_cuub", summary.cuub_ok, summary.tail_leader_gap_sup, bench.cuub_bound,
                       "sup ||x_i - x_0|| over the final quarter"));
  }
  {
    std::vector<Eigen::VectorXd> final_weights = log.weights.back();
    const double cutoff = bench.gains.front().probing.cutoff;
    out.push_back(check_lyapunov_decrease(bench, log, final_weights, cutoff + bench.convergence.window, 1e-6));
    const std::vector<double> offsets{-0.1, -0.05, 0.05, 0.1};
    out.push_back(check_nash_perturbation(bench, final_weights, offsets, 0.02));
  }
  {
    Scenario pi = bench;
    pi.mode = Mode::policy_iteration;
    out.push_back(check_pi_monotonicity(run_policy_iteration(pi), 0.01));
  }
  {
    const Scenario still = consensus_start();
    const TrajectoryLog calm = simulate(still);
    double worst = 0.0;
    for (const auto& row : calm.e)
      for (const auto& e : row) worst = std::max(worst, e.norm());
    out.push_back(make("invariant_manifold", worst < 1e-8, worst, 1e-8, "consensus start, probing off"));
  }
  {
    std::ostringstream a, b;
    write_trajectory_csv(a, simulate(bench), bench.integration.output_stride);
    write_trajectory_csv(b, simulate(bench), bench.integration.output_stride);
    out.push_back(make("determinism", a.str() == b.str(), a.str() == b.str() ? 0.0 : 1.0, 0.0,
                       "two benchmark runs, byte comparison of trajectory output"));
  }
  return out;
}

}  // namespace fadp
