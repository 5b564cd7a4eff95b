#include "fadp/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fadp/errors.hpp"

namespace fadp {

using nlohmann::json;

namespace {

// Walks a JSON document while remembering the dotted path for messages.
class Field {
 public:
  Field(const json& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError(source_ + ": field '" + (path_.empty() ? "<root>" : path_) + "': " + msg);
  }

  const json& raw() const { return node_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  Field operator[](const std::string& key) const {
    if (!node_.is_object()) fail("expected an object");
    if (!node_.contains(key)) fail("missing required key '" + key + "'");
    return Field(node_.at(key), join(key), source_);
  }

  Field operator[](std::size_t idx) const {
    return Field(node_.at(idx), path_ + "[" + std::to_string(idx) + "]", source_);
  }

  void allow_keys(std::initializer_list<const char*> keys) const {
    if (!node_.is_object()) fail("expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : node_.items()) {
      if (!allowed.count(k)) fail("unknown key '" + k + "'");
    }
  }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    const double v = node_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  long integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<long>();
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? (*this)[key].number() : fallback;
  }

  Eigen::VectorXd vector() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(array_size()));
    for (std::size_t k = 0; k < node_.size(); ++k) v(static_cast<Eigen::Index>(k)) = (*this)[k].number();
    return v;
  }

  Eigen::MatrixXd matrix() const {
    const std::size_t rows = array_size();
    if (rows == 0) fail("expected a nonempty matrix");
    const std::size_t cols = (*this)[0].array_size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const Field row = (*this)[r];
      if (row.array_size() != cols) row.fail("ragged matrix row");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c].number();
    }
    return m;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
  const std::string& source_;
};

PolynomialField parse_polynomial(const Field& f, int state_dim) {
  std::vector<std::vector<Monomial>> comps;
  for (std::size_t c = 0; c < f.array_size(); ++c) {
    const Field comp = f[c];
    std::vector<Monomial> terms;
    for (std::size_t t = 0; t < comp.array_size(); ++t) {
      const Field term = comp[t];
      term.allow_keys({"coeff", "exponents"});
      Monomial mono;
      mono.coeff = term["coeff"].number();
      const Field ex = term["exponents"];
      if (static_cast<int>(ex.array_size()) != state_dim) {
        ex.fail("expected " + std::to_string(state_dim) + " exponents");
      }
      for (std::size_t k = 0; k < ex.array_size(); ++k) {
        const long p = ex[k].integer();
        if (p < 0) ex[k].fail("exponents must be >= 0");
        mono.exponents.push_back(static_cast<int>(p));
      }
      terms.push_back(std::move(mono));
    }
    comps.push_back(std::move(terms));
  }
  if (static_cast<int>(comps.size()) != state_dim) f.fail("expected " + std::to_string(state_dim) + " components");
  return PolynomialField(state_dim, std::move(comps));
}

json polynomial_json(const PolynomialField& p) {
  json comps = json::array();
  for (const auto& comp : p.components()) {
    json terms = json::array();
    for (const auto& m : comp) terms.push_back({{"coeff", m.coeff}, {"exponents", m.exponents}});
    comps.push_back(std::move(terms));
  }
  return comps;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Scenario from_json(const Field& root) {
  root.allow_keys({"name", "mode", "seed", "graph", "leader", "leader_initial_state", "agents", "integration",
                   "convergence", "policy_iteration", "cuub_bound", "operating_box"});
  Scenario s;
  s.name = root.has("name") ? root["name"].string() : "custom";
  if (root.has("mode")) {
    const std::string mode = root["mode"].string();
    if (mode == "online") {
      s.mode = Mode::online;
    } else if (mode == "policy_iteration") {
      s.mode = Mode::policy_iteration;
    } else {
      root["mode"].fail("expected 'online' or 'policy_iteration'");
    }
  }
  if (root.has("seed")) {
    const long seed = root["seed"].integer();
    if (seed < 0) root["seed"].fail("seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  // Graph
  const Field g = root["graph"];
  g.allow_keys({"agents", "edges", "pinning"});
  const long big_n = g["agents"].integer();
  if (big_n <= 0) g["agents"].fail("agent count must be positive");
  std::vector<Edge> edges;
  const Field ef = g["edges"];
  for (std::size_t k = 0; k < ef.array_size(); ++k) {
    const Field e = ef[k];
    if (e.array_size() != 3) e.fail("expected [from, to, weight]");
    const long from = e[0].integer(), to = e[1].integer();
    const double w = e[2].number();
    if (from < 1 || from > big_n || to < 1 || to > big_n) e.fail("node ids are 1-based and must be <= agents");
    if (from == to) e.fail("self loops are not allowed");
    if (w < 0.0) e.fail("edge weight a_ij must be >= 0");
    edges.push_back({static_cast<int>(from - 1), static_cast<int>(to - 1), w});
  }
  const Eigen::VectorXd pinning = g["pinning"].vector();
  if (pinning.size() != big_n) g["pinning"].fail("expected one gain per agent");
  if ((pinning.array() < 0.0).any()) g["pinning"].fail("pinning gains b_i must be >= 0");
  if (!(pinning.array() > 0.0).any()) g["pinning"].fail("b_i > 0 is required for at least one node");

  // Leader
  const Field lf = root["leader"];
  lf.allow_keys({"builtin", "drift"});
  std::string leader_builtin;
  PolynomialField leader;
  const Eigen::VectorXd leader_x0 = root["leader_initial_state"].vector();
  const int n = static_cast<int>(leader_x0.size());
  if (n == 0) root["leader_initial_state"].fail("state dimension must be positive");
  if (lf.has("builtin")) {
    leader_builtin = lf["builtin"].string();
    try {
      leader = builtin_leader(leader_builtin);
    } catch (const ValidationError& err) {
      lf["builtin"].fail(err.what());
    }
  } else {
    leader = parse_polynomial(lf["drift"], n);
  }
  if (leader.state_dim() != n) root["leader_initial_state"].fail("dimension differs from the leader model");

  // Agents
  const Field af = root["agents"];
  if (static_cast<long>(af.array_size()) != big_n) af.fail("expected one entry per graph agent");
  std::vector<AgentModel> agents;
  for (long i = 0; i < big_n; ++i) {
    const Field a = af[static_cast<std::size_t>(i)];
    a.allow_keys({"dynamics", "g_norm_bound", "initial_state", "cost", "critic", "learner"});
    const Field d = a["dynamics"];
    d.allow_keys({"builtin", "drift", "input_map"});
    const double beta = a["g_norm_bound"].number();
    AgentModel model;
    if (d.has("builtin")) {
      try {
        model = builtin_agent(d["builtin"].string(), beta);
      } catch (const ValidationError& err) {
        d["builtin"].fail(err.what());
      }
    } else {
      model.drift = parse_polynomial(d["drift"], n);
      const Field cols = d["input_map"];
      for (std::size_t c = 0; c < cols.array_size(); ++c) model.input_columns.push_back(parse_polynomial(cols[c], n));
      model.g_norm_bound = beta;
    }
    try {
      model.validate();
    } catch (const ValidationError& err) {
      d.fail(err.what());
    }
    if (model.state_dim() != n) d.fail("state dimension differs from the leader's");
    agents.push_back(std::move(model));
    const Eigen::VectorXd x0 = a["initial_state"].vector();
    if (x0.size() != n) a["initial_state"].fail("expected dimension " + std::to_string(n));
    s.initial_states.push_back(x0);
  }
  try {
    s.network = Network{DiGraph::from_edges(static_cast<int>(big_n), edges, pinning), std::move(agents),
                        std::move(leader), leader_builtin};
  } catch (const ValidationError& err) {
    g.fail(err.what());
  }
  s.leader_initial = leader_x0;

  for (long i = 0; i < big_n; ++i) {
    const Field a = af[static_cast<std::size_t>(i)];
    const int m_in = s.network.agents[i].input_dim();

    const Field c = a["cost"];
    c.allow_keys({"Q", "R_self", "R_neighbors"});
    CostSpec cost;
    auto spd = [](const Field& f, int dim) {
      const Eigen::MatrixXd m = f.matrix();
      try {
        require_spd(m, dim, "matrix");
      } catch (const ValidationError& err) {
        f.fail(err.what());
      }
      return m;
    };
    cost.q = spd(c["Q"], n);
    cost.r_self = spd(c["R_self"], m_in);
    if (c.has("R_neighbors")) {
      const Field rn = c["R_neighbors"];
      for (std::size_t k = 0; k < rn.array_size(); ++k) {
        const Field entry = rn[k];
        entry.allow_keys({"node", "R"});
        const long j = entry["node"].integer();
        if (j < 1 || j > big_n) entry["node"].fail("node id out of range");
        if (cost.r_neighbors.count(static_cast<int>(j - 1))) entry["node"].fail("duplicate neighbor");
        cost.r_neighbors[static_cast<int>(j - 1)] =
            spd(entry["R"], s.network.agents[static_cast<std::size_t>(j - 1)].input_dim());
      }
    }
    try {
      cost.validate(s.network, static_cast<int>(i));
    } catch (const ValidationError& err) {
      c.fail(err.what());
    }
    s.costs.push_back(std::move(cost));

    GfhmCritic critic = GfhmCritic::identity(n);
    if (a.has("critic")) {
      const Field cf = a["critic"];
      cf.allow_keys({"translations", "phi", "initial_weights"});
      std::vector<std::vector<double>> trans(n, std::vector<double>{0.0});
      if (cf.has("translations")) {
        const Field tf = cf["translations"];
        if (static_cast<int>(tf.array_size()) != n) tf.fail("expected one translation list per error component");
        for (int z = 0; z < n; ++z) {
          const Eigen::VectorXd dz = tf[z].vector();
          trans[z].assign(dz.data(), dz.data() + dz.size());
        }
      }
      std::size_t m = 0;
      for (const auto& tz : trans) m += tz.size();
      const auto mi = static_cast<Eigen::Index>(m);
      const Eigen::VectorXd phi = cf.has("phi") ? cf["phi"].vector() : Eigen::VectorXd::Ones(mi);
      const Eigen::VectorXd w = cf.has("initial_weights") ? cf["initial_weights"].vector() : Eigen::VectorXd::Zero(mi);
      try {
        critic = GfhmCritic(trans, phi, w);
      } catch (const ValidationError& err) {
        cf.fail(err.what());
      }
    }
    s.critics.push_back(std::move(critic));

    LearnerGains gains;
    if (a.has("learner")) {
      const Field lg = a["learner"];
      lg.allow_keys({"adaptation_gain", "gamma", "probing"});
      gains.adaptation = lg.number_or("adaptation_gain", gains.adaptation);
      gains.gamma = lg.number_or("gamma", gains.gamma);
      if (lg.has("probing")) {
        const Field pf = lg["probing"];
        pf.allow_keys({"cutoff", "channels"});
        gains.probing.cutoff = pf.number_or("cutoff", gains.probing.cutoff);
        if (pf.has("channels")) {
          const Field chs = pf["channels"];
          for (std::size_t ch = 0; ch < chs.array_size(); ++ch) {
            std::vector<ProbingTerm> terms;
            for (std::size_t t = 0; t < chs[ch].array_size(); ++t) {
              const Field tf = chs[ch][t];
              tf.allow_keys({"amplitude", "frequency", "phase"});
              ProbingTerm term;
              term.amplitude = tf["amplitude"].number();
              term.frequency = tf["frequency"].number();
              // Missing or null phases are drawn from the seed at run time.
              term.phase = tf.has("phase") && !tf["phase"].raw().is_null()
                               ? tf["phase"].number()
                               : std::numeric_limits<double>::quiet_NaN();
              terms.push_back(term);
            }
            gains.probing.channels.push_back(std::move(terms));
          }
        }
      }
    }
    try {
      gains.validate(n, m_in);
    } catch (const ValidationError& err) {
      a["learner"].fail(err.what());
    }
    s.gains.push_back(std::move(gains));
  }

  if (root.has("integration")) {
    const Field f = root["integration"];
    f.allow_keys({"step", "t_final", "output_stride", "state_guard"});
    s.integration.step = f.number_or("step", s.integration.step);
    s.integration.t_final = f.number_or("t_final", s.integration.t_final);
    if (f.has("output_stride")) s.integration.output_stride = static_cast<int>(f["output_stride"].integer());
    s.integration.state_guard = f.number_or("state_guard", s.integration.state_guard);
  }
  if (root.has("convergence")) {
    const Field f = root["convergence"];
    f.allow_keys({"window", "tolerance"});
    s.convergence.window = f.number_or("window", s.convergence.window);
    s.convergence.tolerance = f.number_or("tolerance", s.convergence.tolerance);
  }
  if (root.has("policy_iteration")) {
    const Field f = root["policy_iteration"];
    f.allow_keys({"tolerance", "max_iterations", "sample_stride", "probe_scales"});
    s.policy_iteration.tolerance = f.number_or("tolerance", s.policy_iteration.tolerance);
    if (f.has("max_iterations")) s.policy_iteration.max_iterations = static_cast<int>(f["max_iterations"].integer());
    if (f.has("sample_stride")) s.policy_iteration.sample_stride = static_cast<int>(f["sample_stride"].integer());
    if (f.has("probe_scales")) {
      const Eigen::VectorXd ps = f["probe_scales"].vector();
      s.policy_iteration.probe_scales.assign(ps.data(), ps.data() + ps.size());
    }
  }
  s.cuub_bound = root.number_or("cuub_bound", s.cuub_bound);
  s.operating_box = root.number_or("operating_box", s.operating_box);

  s.validate();
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    const auto [line, col] = line_column(text, err.byte == 0 ? 0 : err.byte - 1);
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": syntax error: " + err.what());
  }
  return from_json(Field(doc, "", source));
}

Scenario load_scenario(const std::string& path_or_name) {
  if (auto builtin = builtin_scenario(path_or_name)) return *builtin;
  std::ifstream in(path_or_name);
  if (!in) {
    throw ValidationError("cannot open scenario '" + path_or_name +
                          "' (not a builtin name and not a readable file)");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path_or_name);
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["mode"] = s.mode == Mode::online ? "online" : "policy_iteration";
  doc["seed"] = s.seed;
  json edges = json::array();
  for (const auto& e : s.network.graph.edges()) edges.push_back({e.from + 1, e.to + 1, e.weight});
  doc["graph"] = {{"agents", s.size()}, {"edges", edges}, {"pinning", vector_json(s.network.graph.pinning())}};
  if (!s.network.leader_builtin.empty()) {
    doc["leader"] = {{"builtin", s.network.leader_builtin}};
  } else {
    doc["leader"] = {{"drift", polynomial_json(s.network.leader)}};
  }
  doc["leader_initial_state"] = vector_json(s.leader_initial);
  json agents = json::array();
  for (int i = 0; i < s.size(); ++i) {
    const auto& model = s.network.agents[i];
    json a;
    if (!model.builtin.empty()) {
      a["dynamics"] = {{"builtin", model.builtin}};
    } else {
      json cols = json::array();
      for (const auto& col : model.input_columns) cols.push_back(polynomial_json(col));
      a["dynamics"] = {{"drift", polynomial_json(model.drift)}, {"input_map", cols}};
    }
    a["g_norm_bound"] = model.g_norm_bound;
    a["initial_state"] = vector_json(s.initial_states[i]);
    json rn = json::array();
    for (const auto& [j, r] : s.costs[i].r_neighbors) rn.push_back({{"node", j + 1}, {"R", matrix_json(r)}});
    a["cost"] = {{"Q", matrix_json(s.costs[i].q)}, {"R_self", matrix_json(s.costs[i].r_self)}, {"R_neighbors", rn}};
    a["critic"] = {{"translations", s.critics[i].translations()},
                   {"phi", vector_json(s.critics[i].phi())},
                   {"initial_weights", vector_json(s.critics[i].weights())}};
    json channels = json::array();
    for (const auto& ch : s.gains[i].probing.channels) {
      json terms = json::array();
      for (const auto& t : ch) {
        json term = {{"amplitude", t.amplitude}, {"frequency", t.frequency}};
        term["phase"] = std::isnan(t.phase) ? json(nullptr) : json(t.phase);
        terms.push_back(std::move(term));
      }
      channels.push_back(std::move(terms));
    }
    a["learner"] = {{"adaptation_gain", s.gains[i].adaptation},
                    {"gamma", s.gains[i].gamma},
                    {"probing", {{"cutoff", s.gains[i].probing.cutoff}, {"channels", channels}}}};
    agents.push_back(std::move(a));
  }
  doc["agents"] = std::move(agents);
  doc["integration"] = {{"step", s.integration.step},
                        {"t_final", s.integration.t_final},
                        {"output_stride", s.integration.output_stride},
                        {"state_guard", s.integration.state_guard}};
  doc["convergence"] = {{"window", s.convergence.window}, {"tolerance", s.convergence.tolerance}};
  doc["policy_iteration"] = {{"tolerance", s.policy_iteration.tolerance},
                             {"max_iterations", s.policy_iteration.max_iterations},
                             {"sample_stride", s.policy_iteration.sample_stride},
                             {"probe_scales", s.policy_iteration.probe_scales}};
  doc["cuub_bound"] = s.cuub_bound;
  doc["operating_box"] = s.operating_box;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Builtins

Scenario paper_benchmark() {
  Scenario s;
  s.name = "paper-benchmark";
  const int big_n = 5;
  const auto& coeffs = benchmark_input_coeffs();
  std::vector<AgentModel> agents;
  for (int i = 0; i < big_n; ++i) {
    // ||g(x)|| = |c| x2^2 <= |c| on the unit operating box.
    agents.push_back(builtin_agent("paper_node_" + std::to_string(i + 1), std::abs(coeffs[i])));
  }
  s.network = Network{DiGraph::directed_ring(big_n, 2, 1.0), std::move(agents), builtin_leader("paper_leader"),
                      "paper_leader"};
  s.leader_initial = Eigen::Vector2d(0.4, -0.2);
  s.initial_states = {Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(-0.4, 0.5), Eigen::Vector2d(0.2, -0.5),
                      Eigen::Vector2d(-0.5, -0.3), Eigen::Vector2d(0.1, 0.4)};
  for (int i = 0; i < big_n; ++i) {
    CostSpec cost;
    cost.q = Eigen::Matrix2d::Identity();
    cost.r_self = Eigen::MatrixXd::Constant(1, 1, 8.5);
    for (int j : s.network.graph.neighbors(i)) cost.r_neighbors[j] = Eigen::MatrixXd::Constant(1, 1, 0.1);
    s.costs.push_back(std::move(cost));
    s.critics.push_back(GfhmCritic::identity(2));
    LearnerGains g;
    g.adaptation = 0.1;
    g.gamma = 25.0;
    g.probing.cutoff = 10.0;
    g.probing.channels = {{{0.1, 1.0 + 0.37 * i, std::numeric_limits<double>::quiet_NaN()},
                           {0.1, 2.3 + 0.41 * i, std::numeric_limits<double>::quiet_NaN()}}};
    s.gains.push_back(std::move(g));
  }
  s.seed = 2024;
  return s;
}

Scenario consensus_start() {
  Scenario s = paper_benchmark();
  s.name = "consensus-start";
  for (auto& x : s.initial_states) x = s.leader_initial;
  for (auto& g : s.gains) g.probing.channels.clear();
  return s;
}

Scenario scalar_linear() {
  Scenario s;
  s.name = "scalar-linear";
  AgentModel agent;
  agent.drift = PolynomialField(1, {{{1.0, {1}}}});
  agent.input_columns = {PolynomialField(1, {{{1.0, {0}}}})};
  agent.g_norm_bound = 1.0;
  s.network = Network{DiGraph(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1)), {agent},
                      PolynomialField(1, {{{1.0, {1}}}}), ""};
  s.leader_initial = Eigen::VectorXd::Zero(1);
  s.initial_states = {Eigen::VectorXd::Constant(1, 0.5)};
  CostSpec cost;
  cost.q = Eigen::MatrixXd::Identity(1, 1);
  cost.r_self = Eigen::MatrixXd::Identity(1, 1);
  s.costs = {cost};
  s.critics = {GfhmCritic::identity(1)};
  LearnerGains g;
  g.adaptation = 0.0;
  g.gamma = 10.0;
  s.gains = {g};
  s.integration.t_final = 10.0;
  return s;
}

std::vector<std::string> builtin_scenario_names() { return {"paper-benchmark", "consensus-start", "scalar-linear"}; }

std::string builtin_scenario_description(const std::string& name) {
  if (name == "paper-benchmark") {
    return "five nonlinear agents on a directed ring, leader pinned to node 3, online learning";
  }
  if (name == "consensus-start") return "benchmark started at exact consensus with probing off";
  if (name == "scalar-linear") return "single agent x' = x + u tracking a leader at rest, no learning";
  return "";
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "paper-benchmark") return paper_benchmark();
  if (name == "consensus-start") return consensus_start();
  if (name == "scalar-linear") return scalar_linear();
  return std::nullopt;
}

}  // namespace fadp
