#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fadp/controller.hpp"
#include "fadp/dynamics.hpp"
#include "fadp/gfhm.hpp"

namespace fadp {

enum class Mode { online, policy_iteration };

struct IntegrationSettings {
  double step = 1e-3;
  double t_final = 20.0;
  // Every k-th grid point is written to the trajectory file.
  int output_stride = 10;
  // Any |state component| above this aborts the run.
  double state_guard = 1e6;
};

struct ConvergenceSettings {
  double window = 2.0;
  // Max weight drift rate, per second.
  double tolerance = 1e-3;
};

struct PolicyIterationSettings {
  double tolerance = 1e-4;
  int max_iterations = 50;
  // Every k-th grid point of a rollout becomes a regression sample.
  int sample_stride = 10;
  // Probe points for the value monitor are these multiples of each agent's
  // initial consensus error.
  std::vector<double> probe_scales{1.0, 0.75, 0.5, 0.25};
};

struct Scenario {
  std::string name;
  Network network;
  std::vector<CostSpec> costs;
  std::vector<GfhmCritic> critics;
  std::vector<LearnerGains> gains;
  IntegrationSettings integration;
  ConvergenceSettings convergence;
  PolicyIterationSettings policy_iteration;
  std::vector<Eigen::VectorXd> initial_states;
  Eigen::VectorXd leader_initial;
  std::uint64_t seed = 1;
  Mode mode = Mode::online;
  // Radius C of the cooperative ultimate bound on ||x_i - x_0||.
  double cuub_bound = 0.05;
  // Half-width of the box on which the declared g-norm bounds are sampled.
  double operating_box = 1.0;

  int size() const { return network.size(); }
  // Throws ValidationError naming the violated invariant.
  void validate() const;
  // Non-fatal findings (weak connectivity, g-norm bound exceeded).
  std::vector<std::string> warnings() const;
  std::vector<Eigen::VectorXd> initial_weights() const;
};

// Deterministic probing phases drawn from the scenario seed, used for terms
// whose phase was left unspecified (NaN).
void resolve_probing_phases(Scenario& scenario);

using OdeField = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Classical 4th-order Runge-Kutta step. Throws NumericalBlowUp on a
// non-finite stage derivative.
Eigen::VectorXd rk4_step(const OdeField& field, double t, const Eigen::VectorXd& state, double h);

struct TrajectoryLog {
  std::vector<double> t;
  // [time][agent]
  std::vector<std::vector<Eigen::VectorXd>> x, e, u, weights, sigma;
  std::vector<std::vector<double>> cost, residual, accumulated_cost;
  std::vector<Eigen::VectorXd> leader;

  std::size_t length() const { return t.size(); }
  int agents() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
  // Weight history of one agent, or of all agents concatenated when agent < 0.
  std::vector<Eigen::VectorXd> weight_series(int agent = -1) const;
};

// Feedback law replacing the critic control (probing is still added).
using PolicyFn = std::function<Eigen::VectorXd(int agent, double t, const Eigen::VectorXd& x_i,
                                               const Eigen::VectorXd& e_i)>;

struct ControlOffset {
  int agent = 0;
  Eigen::VectorXd delta;
};

struct RunOptions {
  bool adapt = true;
  bool probing = true;
  std::optional<ControlOffset> offset;
  std::optional<PolicyFn> policy;
  // Overrides the scenario's starting weights.
  std::optional<std::vector<Eigen::VectorXd>> initial_weights;
};

// Integrates agents, leader and critic weights as one ODE with RK4.
TrajectoryLog simulate(const Scenario& scenario, const RunOptions& options = {});

// First grid time t_k such that for every k' >= k the largest weight
// excursion (max - min, per component) over [t_k' - window, t_k'] divided by
// window stays below tol.
std::optional<double> detect_convergence(const std::vector<double>& times,
                                         const std::vector<Eigen::VectorXd>& weights,
                                         double window, double tol);

// Trapezoidal integral of r_i over the log's grid.
double cost_integral(const TrajectoryLog& log, int i);

// Per-agent statistics for gain_check and uub_bounds, taken over the part of
// the log at or after `from_time`.
std::vector<RunStats> collect_run_stats(const Scenario& scenario, const TrajectoryLog& log,
                                        double from_time);

struct AgentSummary {
  Eigen::VectorXd final_weights;
  double initial_error_norm = 0.0;
  double final_error_norm = 0.0;
  double tail_error_sup = 0.0;
  double tail_leader_gap_sup = 0.0;
  double accumulated_cost = 0.0;
  double positive_value_fraction = 0.0;
  RunStats stats;
  GainReport gains;
  std::optional<UubBounds> bounds;
  std::string bounds_error;
};

struct RunSummary {
  std::optional<double> convergence_time;
  double max_initial_error = 0.0;
  double max_final_error = 0.0;
  double tail_leader_gap_sup = 0.0;
  bool cuub_ok = false;
  std::vector<AgentSummary> agents;
  std::vector<std::string> warnings;
};

// `tail_from` defaults to the probing cutoff (largest over agents).
RunSummary summarize(const Scenario& scenario, const TrajectoryLog& log,
                     std::optional<double> tail_from = std::nullopt);

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log, int stride);
void write_summary(std::ostream& os, const Scenario& scenario, const RunSummary& summary);

// Reads a file produced by write_trajectory_csv back into a log. Sigma is
// recomputed from the scenario since it is not part of the file.
TrajectoryLog read_trajectory_csv(std::istream& is, const Scenario& scenario);

}  // namespace fadp
