// Command-line front end: run, pi, verify, bounds, list-scenarios.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fadp/errors.hpp"
#include "fadp/policy_iteration.hpp"
#include "fadp/scenario_io.hpp"
#include "fadp/simulator.hpp"
#include "fadp/testkit.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kBlowUp = 3, kVerifyFailed = 4 };

struct Overrides {
  std::string scenario = "paper-benchmark";
  std::string out;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<std::uint64_t> seed;
  std::optional<double> pe_off_time;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario, "builtin scenario name or JSON file")->capture_default_str();
  cmd->add_option("--out", o.out, "output directory (default: runs/<scenario>_<timestamp>)");
  cmd->add_option("--dt", o.dt, "integration step [s]");
  cmd->add_option("--t-final", o.t_final, "final time [s]");
  cmd->add_option("--seed", o.seed, "seed for probing phases");
  cmd->add_option("--pe-off-time", o.pe_off_time, "probing cutoff time [s] for every agent");
}

fadp::Scenario load(const Overrides& o) {
  fadp::Scenario s = fadp::load_scenario(o.scenario);
  if (o.dt) s.integration.step = *o.dt;
  if (o.t_final) s.integration.t_final = *o.t_final;
  if (o.seed) s.seed = *o.seed;
  if (o.pe_off_time) {
    for (auto& g : s.gains) g.probing.cutoff = *o.pe_off_time;
  }
  s.validate();
  for (const auto& w : s.warnings()) std::cerr << "warning: " << w << '\n';
  return s;
}

fs::path output_dir(const Overrides& o, const fadp::Scenario& s) {
  fs::path dir = o.out;
  if (dir.empty()) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&now), "%Y%m%dT%H%M%SZ");
    dir = fs::path("runs") / (s.name + "_" + stamp.str());
  }
  fs::create_directories(dir);
  return dir;
}

void write_run(const fs::path& dir, const fadp::Scenario& s, const fadp::TrajectoryLog& log) {
  {
    std::ofstream csv(dir / "trajectory.csv");
    fadp::write_trajectory_csv(csv, log, s.integration.output_stride);
  }
  {
    std::ofstream cfg(dir / "scenario.json");
    cfg << fadp::serialize_scenario(s);
  }
  std::ofstream summary(dir / "summary.txt");
  fadp::write_summary(summary, s, fadp::summarize(s, log));
}

int cmd_run(const Overrides& o) {
  fadp::Scenario s = load(o);
  const fadp::TrajectoryLog log = fadp::simulate(s);
  const fs::path dir = output_dir(o, s);
  write_run(dir, s, log);
  const auto summary = fadp::summarize(s, log);
  std::cout << "wrote " << (dir / "trajectory.csv").string() << " and " << (dir / "summary.txt").string() << '\n';
  std::cout << "convergence_time = "
            << (summary.convergence_time ? std::to_string(*summary.convergence_time) : std::string("none")) << '\n';
  std::cout << "max_final_error_norm = " << summary.max_final_error << '\n';
  return kOk;
}

int cmd_pi(const Overrides& o) {
  fadp::Scenario s = load(o);
  s.mode = fadp::Mode::policy_iteration;
  const fadp::PolicyIterationResult result = fadp::run_policy_iteration(s);
  const fs::path dir = output_dir(o, s);
  {
    std::ofstream pi(dir / "policy_iteration.txt");
    pi << std::setprecision(17);
    pi << "iterations = " << result.iterations() << '\n';
    pi << "converged = " << (result.converged ? "true" : "false") << '\n';
    for (int k = 0; k < result.iterations(); ++k) {
      pi << "iteration." << k << ".weight_change = " << result.weight_change[k] << '\n';
      for (std::size_t i = 0; i < result.evaluated_weights[k].size(); ++i) {
        const std::string p = "iteration." + std::to_string(k) + ".agent." + std::to_string(i + 1);
        pi << p << ".weights = [" << result.evaluated_weights[k][i].transpose() << "]\n";
        pi << p << ".probe_values = [";
        for (std::size_t q = 0; q < result.probe_values[k][i].size(); ++q) {
          pi << (q ? ", " : "") << result.probe_values[k][i][q];
        }
        pi << "]\n";
      }
    }
    pi << fadp::check_pi_monotonicity(result) << '\n';
  }
  // Closed loop under the final policies, learning and probing off.
  fadp::RunOptions opt;
  opt.adapt = false;
  opt.probing = false;
  opt.initial_weights = result.final_weights();
  write_run(dir, s, fadp::simulate(s, opt));
  std::cout << "policy iteration: " << result.iterations() << " iterations, "
            << (result.converged ? "converged" : "iteration cap reached") << "; wrote " << dir.string() << '\n';
  return kOk;
}

int cmd_verify(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : fadp::run_verification_suite(seed)) {
    std::cout << r << '\n';
    if (r.status == fadp::CheckStatus::fail) ok = false;
  }
  std::cout << (ok ? "all checks passed" : "verification FAILED") << '\n';
  return ok ? kOk : kVerifyFailed;
}

int cmd_bounds(const Overrides& o, const std::string& log_path, std::optional<double> from) {
  const fadp::Scenario s = load(o);
  std::ifstream in(log_path);
  if (!in) throw fadp::ValidationError("cannot open trajectory '" + log_path + "'");
  const fadp::TrajectoryLog log = fadp::read_trajectory_csv(in, s);
  fadp::write_summary(std::cout, s, fadp::summarize(s, log, from));
  return kOk;
}

int cmd_list() {
  for (const auto& name : fadp::builtin_scenario_names()) {
    std::cout << std::left << std::setw(18) << name << fadp::builtin_scenario_description(name) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-following optimal coordination with fuzzy-hyperbolic critics"};
  app.require_subcommand(1);

  Overrides run_opts, pi_opts, bounds_opts;
  auto* run = app.add_subcommand("run", "online learning run");
  add_overrides(run, run_opts);
  auto* pi = app.add_subcommand("pi", "offline policy iteration");
  add_overrides(pi, pi_opts);
  std::uint64_t verify_seed = 12345;
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--seed", verify_seed, "seed for randomized checks")->capture_default_str();
  auto* bounds = app.add_subcommand("bounds", "recompute gain checks and ultimate bounds from a trajectory file");
  add_overrides(bounds, bounds_opts);
  std::string log_path;
  std::optional<double> from;
  bounds->add_option("--log", log_path, "trajectory.csv written by run")->required();
  bounds->add_option("--from", from, "start of the post-convergence window [s]");
  auto* list = app.add_subcommand("list-scenarios", "print builtin scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (pi->parsed()) return cmd_pi(pi_opts);
    if (verify->parsed()) return cmd_verify(verify_seed);
    if (bounds->parsed()) return cmd_bounds(bounds_opts, log_path, from);
    if (list->parsed()) return cmd_list();
  } catch (const fadp::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const fadp::NumericalBlowUp& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBlowUp;
  } catch (const fadp::InadmissiblePolicy& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBlowUp;
  } catch (const fadp::InsufficientExcitation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBlowUp;
  }
  return kUsage;
}
