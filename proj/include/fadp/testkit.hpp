#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fadp/controller.hpp"
#include "fadp/dynamics.hpp"
#include "fadp/policy_iteration.hpp"
#include "fadp/simulator.hpp"

namespace fadp {

enum class CheckStatus { pass, fail, inconclusive };

struct CheckReport {
  std::string name;
  CheckStatus status = CheckStatus::fail;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string context;

  bool passed() const { return status == CheckStatus::pass; }
};

std::ostream& operator<<(std::ostream& os, const CheckReport& report);

// Neighbor-only error rate against the full-network contraction, both
// projected on `probe`. Passes when the gap is within rel_tol times the sum
// of absolute projected contributions.
CheckReport check_appendix_a(const Network& net, int i, States states, const Eigen::VectorXd& leader_state,
                             States controls, const Eigen::VectorXd& probe, double rel_tol = 1e-12);

// `draws` random networks (sizes 2..7, random edges, weights, pinning,
// benchmark-family agents with random input gains) with random states,
// controls, probes and agent index.
CheckReport check_appendix_a_random(std::uint64_t seed, int draws, double rel_tol = 1e-12);

// Row sums of L: exactly zero on integer weights, below 1e-12 on real weights.
CheckReport check_laplacian_rows(std::uint64_t seed, int graphs);

// Central differences (step h) of the critic value against Lambda * theta on
// random critics and points. Error per component is relative to the sum of
// absolute basis contributions to that component.
CheckReport check_gradient_fidelity(std::uint64_t seed, int draws, double h = 1e-5, double rel_tol = 1e-6);

// Integrates the dataset-averaged update flow
//   theta' = -(a / K) sum_k sigma_k (sigma_k^T theta + r_k)
// with RK4 until stationary and compares with the closed-form least-squares
// weights. Gram condition numbers >= 1e6 are inconclusive.
CheckReport check_lsq_vs_gradient_flow(std::span<const RegressionSample> samples, double adaptation,
                                       const Eigen::VectorXd& start, double rel_tol = 1e-3);

// Random well-conditioned datasets of dimension m with `count` samples each.
std::vector<std::vector<RegressionSample>> random_regression_datasets(std::uint64_t seed, int datasets, int m,
                                                                      int count);

// Re-simulates with learning and probing off, adding each constant offset to
// one agent's control at a time. Passes when no offset lowers the perturbed
// agent's integrated cost by more than slack * J_i.
CheckReport check_nash_perturbation(const Scenario& scenario, const std::vector<Eigen::VectorXd>& weights,
                                    std::span<const double> offsets, double slack = 0.02);
CheckReport check_nash_perturbation(const Scenario& scenario, const PolicyFn& policy,
                                    std::span<const double> offsets, double slack = 0.02);

// Along the log from `from_time`, V_i(e_i(t)) evaluated with `weights` may
// rise between any two instants by at most the integral of |residual_i| over
// that interval (plus abs_tol).
CheckReport check_lyapunov_decrease(const Scenario& scenario, const TrajectoryLog& log,
                                    const std::vector<Eigen::VectorXd>& weights, double from_time,
                                    double abs_tol = 1e-9);

// Probe values may grow from one iteration to the next by at most
// band * max_p |V^k_i(p)|.
CheckReport check_pi_monotonicity(const PolicyIterationResult& result, double band = 0.01);

// Everything above plus benchmark runs; what the `verify` command prints.
std::vector<CheckReport> run_verification_suite(std::uint64_t seed = 12345);

}  // namespace fadp
