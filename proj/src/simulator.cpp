#include "fadp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "fadp/errors.hpp"

namespace fadp {

// ---------------------------------------------------------------------------
// Scenario

void Scenario::validate() const {
  network.validate();
  const int big_n = size();
  const int n = network.state_dim();
  auto count = [&](std::size_t got, const char* what) {
    if (static_cast<int>(got) != big_n) {
      throw ValidationError(std::string("scenario: expected ") + std::to_string(big_n) + " " + what +
                            ", got " + std::to_string(got));
    }
  };
  count(costs.size(), "cost specs");
  count(critics.size(), "critics");
  count(gains.size(), "learner gain sets");
  count(initial_states.size(), "initial states");
  if (leader_initial.size() != n) throw ValidationError("scenario: leader initial state has wrong dimension");
  for (int i = 0; i < big_n; ++i) {
    if (initial_states[i].size() != n || !initial_states[i].allFinite()) {
      throw ValidationError("scenario: initial state of agent " + std::to_string(i + 1) +
                            " must be a finite vector of dimension " + std::to_string(n));
    }
    if (critics[i].error_dim() != n) {
      throw ValidationError("scenario: critic of agent " + std::to_string(i + 1) +
                            " must take " + std::to_string(n) + "-dimensional errors");
    }
    costs[i].validate(network, i);
    gains[i].validate(n, network.agents[i].input_dim());
  }
  if (!(integration.step > 0.0)) throw ValidationError("scenario: integration step must be > 0");
  if (!(integration.t_final > integration.step)) throw ValidationError("scenario: t_final must exceed the step");
  if (integration.output_stride < 1) throw ValidationError("scenario: output stride must be >= 1");
  if (!(integration.state_guard > 0.0)) throw ValidationError("scenario: state guard must be > 0");
  if (!(convergence.window > 0.0) || !(convergence.tolerance > 0.0)) {
    throw ValidationError("scenario: convergence window and tolerance must be > 0");
  }
  if (!(policy_iteration.tolerance > 0.0) || policy_iteration.max_iterations < 1 ||
      policy_iteration.sample_stride < 1) {
    throw ValidationError("scenario: policy-iteration settings must be positive");
  }
  if (!(cuub_bound > 0.0)) throw ValidationError("scenario: CUUB bound must be > 0");
  if (!(operating_box > 0.0)) throw ValidationError("scenario: operating box must be > 0");
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  if (!network.graph.is_strongly_connected()) {
    out.push_back("communication graph is not strongly connected");
  }
  for (int i = 0; i < size(); ++i) {
    const double seen = sampled_input_norm(network.agents[i], operating_box);
    if (seen > network.agents[i].g_norm_bound) {
      std::ostringstream msg;
      msg << "agent " << i + 1 << ": sampled ||g|| = " << seen << " exceeds declared bound "
          << network.agents[i].g_norm_bound << " on the operating box";
      out.push_back(msg.str());
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> Scenario::initial_weights() const {
  std::vector<Eigen::VectorXd> w;
  for (const auto& c : critics) w.push_back(c.weights());
  return w;
}

void resolve_probing_phases(Scenario& scenario) {
  std::mt19937_64 rng(scenario.seed);
  for (auto& g : scenario.gains) {
    for (auto& channel : g.probing.channels) {
      for (auto& term : channel) {
        // 53 random bits -> [0, 1), independent of the library's distributions.
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (std::isnan(term.phase)) term.phase = 2.0 * std::numbers::pi * unit;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Integration

Eigen::VectorXd rk4_step(const OdeField& field, double t, const Eigen::VectorXd& state, double h) {
  auto eval = [&](double tt, const Eigen::VectorXd& y) {
    Eigen::VectorXd d = field(tt, y);
    if (!d.allFinite()) {
      std::ostringstream msg;
      msg << "numerical blow-up at t = " << tt;
      throw NumericalBlowUp(msg.str(), tt);
    }
    return d;
  };
  const Eigen::VectorXd k1 = eval(t, state);
  const Eigen::VectorXd k2 = eval(t + 0.5 * h, state + 0.5 * h * k1);
  const Eigen::VectorXd k3 = eval(t + 0.5 * h, state + 0.5 * h * k2);
  const Eigen::VectorXd k4 = eval(t + h, state + h * k3);
  return state + h * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
}

namespace {

// Packed ODE state: [x_1 .. x_N, x_0, theta_1 .. theta_N].
struct Layout {
  int n = 0;
  int agents = 0;
  std::vector<int> weight_offset;
  std::vector<int> weight_size;
  int total = 0;

  explicit Layout(const Scenario& s) : n(s.network.state_dim()), agents(s.size()) {
    int offset = (agents + 1) * n;
    for (const auto& c : s.critics) {
      weight_offset.push_back(offset);
      weight_size.push_back(c.basis_size());
      offset += c.basis_size();
    }
    total = offset;
  }
};

// Every instantaneous quantity of the coupled system at one (t, y).
struct Snapshot {
  std::vector<Eigen::VectorXd> x, e, u, weights, sigma;
  std::vector<double> cost, residual;
  Eigen::VectorXd leader;
  Eigen::VectorXd derivative;
};

class CoupledSystem {
 public:
  CoupledSystem(const Scenario& s, const RunOptions& opt) : s_(s), opt_(opt), layout_(s) {
    for (int i = 0; i < s.size(); ++i) neighbors_.push_back(s.network.graph.neighbors(i));
  }

  const Layout& layout() const { return layout_; }

  Eigen::VectorXd pack(const std::vector<Eigen::VectorXd>& weights) const {
    Eigen::VectorXd y(layout_.total);
    const int n = layout_.n;
    for (int i = 0; i < layout_.agents; ++i) y.segment(i * n, n) = s_.initial_states[i];
    y.segment(layout_.agents * n, n) = s_.leader_initial;
    for (int i = 0; i < layout_.agents; ++i) {
      if (weights[i].size() != layout_.weight_size[i]) {
        throw ValidationError("initial weights of agent " + std::to_string(i + 1) + " have wrong size");
      }
      y.segment(layout_.weight_offset[i], layout_.weight_size[i]) = weights[i];
    }
    return y;
  }

  Snapshot evaluate(double t, const Eigen::VectorXd& y) const {
    const auto& net = s_.network;
    const int n = layout_.n;
    const int big_n = layout_.agents;
    Snapshot snap;
    snap.leader = y.segment(big_n * n, n);
    for (int i = 0; i < big_n; ++i) {
      snap.x.push_back(y.segment(i * n, n));
      snap.weights.push_back(y.segment(layout_.weight_offset[i], layout_.weight_size[i]));
    }
    std::vector<Eigen::MatrixXd> lambda(big_n);
    for (int i = 0; i < big_n; ++i) {
      Eigen::VectorXd e = net.graph.pinning(i) * (snap.x[i] - snap.leader);
      for (int j : neighbors_[i]) e += net.graph.weight(i, j) * (snap.x[i] - snap.x[j]);
      snap.e.push_back(std::move(e));
      lambda[i] = s_.critics[i].gradient_matrix(snap.e[i]);
      Eigen::VectorXd u =
          opt_.policy ? (*opt_.policy)(i, t, snap.x[i], snap.e[i])
                      : control_from_gradient(net.agents[i], net.graph, i, snap.x[i],
                                              lambda[i] * snap.weights[i], s_.costs[i]);
      if (opt_.probing && !s_.gains[i].probing.channels.empty()) {
        u += probing_signal(s_.gains[i].probing, t);
      }
      if (opt_.offset && opt_.offset->agent == i) u += opt_.offset->delta;
      snap.u.push_back(std::move(u));
    }
    snap.derivative.resize(layout_.total);
    const Eigen::VectorXd leader_rate = net.leader(snap.leader);
    // x_j' and f_ej + g_j u_j, shared by every error rate below.
    std::vector<Eigen::VectorXd> mismatch(big_n);
    for (int j = 0; j < big_n; ++j) {
      const auto& agent = net.agents[j];
      const Eigen::VectorXd xdot = agent.drift(snap.x[j]) + agent.input_matrix(snap.x[j]) * snap.u[j];
      snap.derivative.segment(j * n, n) = xdot;
      mismatch[j] = xdot - leader_rate;
    }
    for (int i = 0; i < big_n; ++i) {
      Eigen::VectorXd edot = net.graph.self_coupling(i) * mismatch[i];
      for (int j : neighbors_[i]) edot -= net.graph.weight(i, j) * mismatch[j];
      snap.sigma.push_back(lambda[i].transpose() * edot);
      snap.cost.push_back(cost_rate(s_.costs[i], snap.e[i], i, snap.u));
      snap.residual.push_back(snap.cost[i] + snap.weights[i].dot(snap.sigma[i]));
      snap.derivative.segment(layout_.weight_offset[i], layout_.weight_size[i]) =
          opt_.adapt ? weight_update_rate(s_.gains[i].adaptation, snap.weights[i], snap.sigma[i], snap.cost[i])
                     : Eigen::VectorXd::Zero(layout_.weight_size[i]);
    }
    snap.derivative.segment(big_n * n, n) = leader_rate;
    return snap;
  }

 private:
  const Scenario& s_;
  const RunOptions& opt_;
  Layout layout_;
  std::vector<std::vector<int>> neighbors_;
};

void record(TrajectoryLog& log, double t, Snapshot&& snap) {
  log.t.push_back(t);
  log.x.push_back(std::move(snap.x));
  log.e.push_back(std::move(snap.e));
  log.u.push_back(std::move(snap.u));
  log.weights.push_back(std::move(snap.weights));
  log.sigma.push_back(std::move(snap.sigma));
  log.cost.push_back(std::move(snap.cost));
  log.residual.push_back(std::move(snap.residual));
  log.leader.push_back(std::move(snap.leader));
}

void accumulate_costs(TrajectoryLog& log) {
  const int big_n = log.agents();
  log.accumulated_cost.assign(log.length(), std::vector<double>(big_n, 0.0));
  for (std::size_t k = 1; k < log.length(); ++k) {
    const double dt = log.t[k] - log.t[k - 1];
    for (int i = 0; i < big_n; ++i) {
      log.accumulated_cost[k][i] =
          log.accumulated_cost[k - 1][i] + 0.5 * dt * (log.cost[k - 1][i] + log.cost[k][i]);
    }
  }
}

}  // namespace

std::vector<Eigen::VectorXd> TrajectoryLog::weight_series(int agent) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(length());
  for (const auto& w : weights) {
    if (agent >= 0) {
      out.push_back(w[agent]);
      continue;
    }
    Eigen::Index total = 0;
    for (const auto& wi : w) total += wi.size();
    Eigen::VectorXd flat(total);
    Eigen::Index k = 0;
    for (const auto& wi : w) {
      flat.segment(k, wi.size()) = wi;
      k += wi.size();
    }
    out.push_back(std::move(flat));
  }
  return out;
}

TrajectoryLog simulate(const Scenario& input, const RunOptions& options) {
  input.validate();
  Scenario scenario = input;
  resolve_probing_phases(scenario);
  CoupledSystem system(scenario, options);
  const double h = scenario.integration.step;
  const auto steps = static_cast<long>(std::llround(scenario.integration.t_final / h));
  const double guard = scenario.integration.state_guard;

  Eigen::VectorXd y = system.pack(options.initial_weights ? *options.initial_weights
                                                          : scenario.initial_weights());
  const OdeField field = [&](double t, const Eigen::VectorXd& state) {
    return system.evaluate(t, state).derivative;
  };

  TrajectoryLog log;
  log.t.reserve(steps + 1);
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * h;
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > guard) {
      std::ostringstream msg;
      msg << "numerical blow-up at t = " << t << ": a state component left the guard box |v| <= " << guard;
      throw NumericalBlowUp(msg.str(), t);
    }
    record(log, t, system.evaluate(t, y));
    if (k == steps) break;
    y = rk4_step(field, t, y, h);
  }
  accumulate_costs(log);
  return log;
}

// ---------------------------------------------------------------------------
// Post-processing

std::optional<double> detect_convergence(const std::vector<double>& times,
                                         const std::vector<Eigen::VectorXd>& weights,
                                         double window, double tol) {
  const std::size_t len = times.size();
  if (len == 0 || weights.size() != len) return std::nullopt;
  const Eigen::Index dims = weights.front().size();
  const double eps = 1e-9 * std::max(1.0, window);

  // Sliding max/min per component with monotone deques of indices.
  std::vector<std::deque<std::size_t>> hi(dims), lo(dims);
  std::size_t start = 0;
  std::optional<std::size_t> first_ok;
  bool any_evaluated = false;
  for (std::size_t k = 0; k < len; ++k) {
    for (Eigen::Index c = 0; c < dims; ++c) {
      while (!hi[c].empty() && weights[hi[c].back()](c) <= weights[k](c)) hi[c].pop_back();
      hi[c].push_back(k);
      while (!lo[c].empty() && weights[lo[c].back()](c) >= weights[k](c)) lo[c].pop_back();
      lo[c].push_back(k);
    }
    while (times[start] < times[k] - window - eps) ++start;
    for (Eigen::Index c = 0; c < dims; ++c) {
      while (hi[c].front() < start) hi[c].pop_front();
      while (lo[c].front() < start) lo[c].pop_front();
    }
    if (times[k] - times.front() < window - eps) continue;
    any_evaluated = true;
    double drift = 0.0;
    for (Eigen::Index c = 0; c < dims; ++c) {
      drift = std::max(drift, weights[hi[c].front()](c) - weights[lo[c].front()](c));
    }
    if (drift / window < tol) {
      if (!first_ok) first_ok = k;
    } else {
      first_ok.reset();
    }
  }
  if (!any_evaluated || !first_ok) return std::nullopt;
  return times[*first_ok];
}

double cost_integral(const TrajectoryLog& log, int i) {
  double total = 0.0;
  for (std::size_t k = 1; k < log.length(); ++k) {
    total += 0.5 * (log.t[k] - log.t[k - 1]) * (log.cost[k - 1][i] + log.cost[k][i]);
  }
  return total;
}

std::vector<RunStats> collect_run_stats(const Scenario& scenario, const TrajectoryLog& log,
                                        double from_time) {
  const auto& net = scenario.network;
  std::vector<RunStats> stats(scenario.size());
  for (int i = 0; i < scenario.size(); ++i) {
    RunStats& st = stats[i];
    const int m = scenario.critics[i].basis_size();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> tail_residuals;
    const Eigen::RowVectorXd row = net.graph.coupling_row(i);
    auto nodes = net.graph.neighbors(i);
    nodes.push_back(i);
    for (std::size_t k = 0; k < log.length(); ++k) {
      const Eigen::VectorXd& s = log.sigma[k][i];
      st.sigma_max = std::max(st.sigma_max, s.norm());
      gram += s * s.transpose();
      if (log.t[k] < from_time) continue;
      tail_residuals.push_back(std::abs(log.residual[k][i]));
      double coupling = 0.0;
      for (int j : nodes) {
        coupling += (row(j) * drift_mismatch(net, j, log.x[k][j], log.leader[k])).squaredNorm();
      }
      st.drift_coupling_sq = std::max(st.drift_coupling_sq, coupling);
    }
    if (log.length() > 0) st.q = std::max(0.0, min_eigenvalue(gram / static_cast<double>(log.length())));
    if (!tail_residuals.empty()) {
      const auto idx = static_cast<std::size_t>(std::ceil(0.99 * tail_residuals.size())) - 1;
      std::nth_element(tail_residuals.begin(), tail_residuals.begin() + idx, tail_residuals.end());
      st.eps_bar = tail_residuals[idx];
    }
  }
  return stats;
}

RunSummary summarize(const Scenario& scenario, const TrajectoryLog& log,
                     std::optional<double> tail_from) {
  RunSummary out;
  out.warnings = scenario.warnings();
  if (log.length() == 0) return out;
  double cutoff = 0.0;
  for (const auto& g : scenario.gains) cutoff = std::max(cutoff, g.probing.cutoff);
  const double from = tail_from.value_or(std::min(cutoff, log.t.back()));
  const double quarter = log.t.front() + 0.75 * (log.t.back() - log.t.front());

  out.convergence_time = detect_convergence(log.t, log.weight_series(), scenario.convergence.window,
                                            scenario.convergence.tolerance);
  const auto stats = collect_run_stats(scenario, log, from);
  std::vector<double> betas;
  for (const auto& a : scenario.network.agents) betas.push_back(a.g_norm_bound);

  for (int i = 0; i < scenario.size(); ++i) {
    AgentSummary a;
    a.final_weights = log.weights.back()[i];
    a.initial_error_norm = log.e.front()[i].norm();
    a.final_error_norm = log.e.back()[i].norm();
    a.accumulated_cost = log.accumulated_cost.back()[i];
    std::size_t positive = 0;
    for (std::size_t k = 0; k < log.length(); ++k) {
      if (log.t[k] >= from) a.tail_error_sup = std::max(a.tail_error_sup, log.e[k][i].norm());
      if (log.t[k] >= quarter) {
        a.tail_leader_gap_sup = std::max(a.tail_leader_gap_sup, (log.x[k][i] - log.leader[k]).norm());
      }
      if (log.weights[k][i].dot(scenario.critics[i].basis(log.e[k][i])) > 0.0) ++positive;
    }
    a.positive_value_fraction = static_cast<double>(positive) / static_cast<double>(log.length());
    a.stats = stats[i];
    a.gains = gain_check(scenario.gains[i], scenario.costs[i], scenario.network.graph, i, betas, stats[i]);
    try {
      a.bounds = uub_bounds(stats[i], scenario.gains[i], scenario.costs[i], scenario.network.graph, i);
    } catch (const GainConditionError& err) {
      a.bounds_error = err.what();
    }
    out.max_initial_error = std::max(out.max_initial_error, a.initial_error_norm);
    out.max_final_error = std::max(out.max_final_error, a.final_error_norm);
    out.tail_leader_gap_sup = std::max(out.tail_leader_gap_sup, a.tail_leader_gap_sup);
    out.agents.push_back(std::move(a));
  }
  out.cuub_ok = std::isfinite(out.tail_leader_gap_sup) && out.tail_leader_gap_sup < scenario.cuub_bound;
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? ", " : "") + num(v(k));
  return s + "]";
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log, int stride) {
  if (log.length() == 0) return;
  const int big_n = log.agents();
  std::string header = "t";
  for (int i = 0; i < big_n; ++i) {
    const std::string id = std::to_string(i + 1);
    for (Eigen::Index c = 0; c < log.x[0][i].size(); ++c) header += ",x" + id + "_" + std::to_string(c + 1);
    for (Eigen::Index c = 0; c < log.e[0][i].size(); ++c) header += ",e" + id + "_" + std::to_string(c + 1);
    for (Eigen::Index c = 0; c < log.u[0][i].size(); ++c) header += ",u" + id + "_" + std::to_string(c + 1);
    header += ",r" + id + ",J" + id;
    for (Eigen::Index c = 0; c < log.weights[0][i].size(); ++c) {
      header += ",theta" + id + "_" + std::to_string(c + 1);
    }
    header += ",residual" + id;
  }
  for (Eigen::Index c = 0; c < log.leader[0].size(); ++c) header += ",x0_" + std::to_string(c + 1);
  os << header << '\n';

  const std::size_t step = static_cast<std::size_t>(std::max(stride, 1));
  std::string line;
  for (std::size_t k = 0; k < log.length(); ++k) {
    if (k % step != 0 && k + 1 != log.length()) continue;
    line = num(log.t[k]);
    auto put = [&line](const Eigen::VectorXd& v) {
      for (Eigen::Index c = 0; c < v.size(); ++c) line += ',' + num(v(c));
    };
    for (int i = 0; i < big_n; ++i) {
      put(log.x[k][i]);
      put(log.e[k][i]);
      put(log.u[k][i]);
      line += ',' + num(log.cost[k][i]) + ',' + num(log.accumulated_cost[k][i]);
      put(log.weights[k][i]);
      line += ',' + num(log.residual[k][i]);
    }
    put(log.leader[k]);
    os << line << '\n';
  }
}

void write_summary(std::ostream& os, const Scenario& s, const RunSummary& summary) {
  auto kv = [&os](const std::string& key, const std::string& value) { os << key << " = " << value << '\n'; };
  kv("scenario", s.name);
  kv("mode", s.mode == Mode::online ? "online" : "policy_iteration");
  kv("seed", std::to_string(s.seed));
  kv("agents", std::to_string(s.size()));
  kv("integration.step", num(s.integration.step));
  kv("integration.t_final", num(s.integration.t_final));
  kv("integration.output_stride", std::to_string(s.integration.output_stride));
  kv("integration.state_guard", num(s.integration.state_guard));
  kv("convergence.window", num(s.convergence.window));
  kv("convergence.tolerance", num(s.convergence.tolerance));
  kv("cuub_bound", num(s.cuub_bound));
  kv("operating_box", num(s.operating_box));
  for (int i = 0; i < s.size(); ++i) {
    const std::string p = "agent." + std::to_string(i + 1) + ".";
    kv(p + "adaptation_gain", num(s.gains[i].adaptation));
    kv(p + "gamma", num(s.gains[i].gamma));
    kv(p + "probing_cutoff", num(s.gains[i].probing.cutoff));
    kv(p + "g_norm_bound", num(s.network.agents[i].g_norm_bound));
  }
  for (const auto& w : summary.warnings) kv("warning", w);

  kv("convergence_time", summary.convergence_time ? num(*summary.convergence_time) : "none");
  kv("max_initial_error_norm", num(summary.max_initial_error));
  kv("max_final_error_norm", num(summary.max_final_error));
  kv("tail_leader_gap_sup", num(summary.tail_leader_gap_sup));
  kv("cuub", summary.cuub_ok ? "pass" : "fail");
  for (std::size_t i = 0; i < summary.agents.size(); ++i) {
    const auto& a = summary.agents[i];
    const std::string p = "agent." + std::to_string(i + 1) + ".";
    kv(p + "final_weights", vec(a.final_weights));
    kv(p + "initial_error_norm", num(a.initial_error_norm));
    kv(p + "final_error_norm", num(a.final_error_norm));
    kv(p + "tail_error_sup", num(a.tail_error_sup));
    kv(p + "tail_leader_gap_sup", num(a.tail_leader_gap_sup));
    kv(p + "accumulated_cost", num(a.accumulated_cost));
    kv(p + "positive_value_fraction", num(a.positive_value_fraction));
    kv(p + "sigma_max", num(a.stats.sigma_max));
    kv(p + "q_estimate", num(a.stats.q));
    kv(p + "eps_bar", num(a.stats.eps_bar));
    kv(p + "drift_coupling_sq", num(a.stats.drift_coupling_sq));
    kv(p + "gain_check.adaptation_in_(0,2)", a.gains.adaptation_in_range ? "pass" : "fail");
    kv(p + "gain_check.adaptation_sharp_limit", num(a.gains.adaptation_sharp_limit));
    kv(p + "gain_check.adaptation_sharp", a.gains.adaptation_sharp ? "pass" : "fail");
    kv(p + "gain_check.gamma_threshold", num(a.gains.gamma_threshold));
    kv(p + "gain_check.gamma", a.gains.gamma_ok ? "pass" : "fail");
    kv(p + "gain_check", a.gains.passed() ? "pass" : "fail");
    if (a.bounds) {
      kv(p + "bound.weight_error", num(a.bounds->weight_error));
      kv(p + "bound.consensus_error", num(a.bounds->consensus_error));
    } else {
      kv(p + "bound", a.bounds_error);
    }
  }
}

TrajectoryLog read_trajectory_csv(std::istream& is, const Scenario& scenario) {
  const int big_n = scenario.size();
  const int n = scenario.network.state_dim();
  std::size_t expected = 1 + static_cast<std::size_t>(n);
  for (int i = 0; i < big_n; ++i) {
    expected += 2 * n + scenario.network.agents[i].input_dim() + 3 + scenario.critics[i].basis_size();
  }
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("trajectory: empty file");
  if (static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1 != expected) {
    throw ValidationError("trajectory: header does not match the scenario's column layout");
  }
  TrajectoryLog log;
  std::size_t lineno = 1;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    vals.clear();
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("trajectory: line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (vals.size() != expected) {
      throw ValidationError("trajectory: line " + std::to_string(lineno) + " has " +
                            std::to_string(vals.size()) + " fields, expected " + std::to_string(expected));
    }
    std::size_t p = 0;
    auto take = [&](Eigen::Index len) {
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vals.data() + p, len);
      p += static_cast<std::size_t>(len);
      return v;
    };
    log.t.push_back(vals[p++]);
    std::vector<Eigen::VectorXd> x, e, u, w;
    std::vector<double> r, acc, res;
    for (int i = 0; i < big_n; ++i) {
      x.push_back(take(n));
      e.push_back(take(n));
      u.push_back(take(scenario.network.agents[i].input_dim()));
      r.push_back(vals[p++]);
      acc.push_back(vals[p++]);
      w.push_back(take(scenario.critics[i].basis_size()));
      res.push_back(vals[p++]);
    }
    log.leader.push_back(take(n));
    std::vector<Eigen::VectorXd> sig;
    for (int i = 0; i < big_n; ++i) {
      sig.push_back(sigma_vector(scenario.critics[i], scenario.network, i, x, log.leader.back(), u));
    }
    log.x.push_back(std::move(x));
    log.e.push_back(std::move(e));
    log.u.push_back(std::move(u));
    log.weights.push_back(std::move(w));
    log.sigma.push_back(std::move(sig));
    log.cost.push_back(std::move(r));
    log.accumulated_cost.push_back(std::move(acc));
    log.residual.push_back(std::move(res));
  }
  return log;
}

}  // namespace fadp
