#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fadp/simulator.hpp"

namespace fadp {

// Parses a JSON scenario document. Errors are ValidationError with either a
// line:column location (syntax) or a dotted field path (content).
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");

// A registered builtin name, or a path to a JSON scenario file.
Scenario load_scenario(const std::string& path_or_name);

// Complete JSON document; parse_scenario(serialize_scenario(s)) reproduces s.
std::string serialize_scenario(const Scenario& scenario);

std::vector<std::string> builtin_scenario_names();
std::string builtin_scenario_description(const std::string& name);
std::optional<Scenario> builtin_scenario(const std::string& name);

// Five-agent benchmark: directed ring, leader pinned to node 3, Q = I,
// R_ii = 8.5, R_ij = 0.1, a_i = 0.1, Phi = I, d = 0.
Scenario paper_benchmark();
// The benchmark started at exact consensus with probing disabled.
Scenario consensus_start();
// One agent x' = x + u pinned to a leader x0' = x0 sitting at the origin.
Scenario scalar_linear();

}  // namespace fadp
