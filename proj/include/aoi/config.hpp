#pragma once

// Experiment configuration: a single strict JSON document. Unknown keys are
// rejected; every error names the line it refers to.
//
//   {
//     "description": "free text",                       (optional)
//     "network": {
//       "n_links": 20,
//       "weights": 1.0 | [w_0, ...],                     (optional, default 1.0)
//       "gamma": [g_0, ...]                              (either this ...)
//       "template": {"gamma_good": 0.9, "gamma_bad": 0.1, "n_bad": 5}   (... or this)
//     },
//     "interference": {"type": "k_of_n", "k": 5}
//                   | {"type": "conflict_graph", "edges": [[0, 1], ...]}
//                   | {"type": "explicit_sets", "sets": [[0], [1, 2], ...]},
//     "policies": [ {"type": "virtual_queue", "V": 1.0},
//                   {"type": "age_based", "beta": 1.0},
//                   {"type": "stationary_optimal"},     channel-blind optimum (pi_C)
//                   {"type": "s_only_optimal"},         channel-aware optimum, small N
//                   {"type": "priority", "order": [...]},   (order optional)
//                   {"type": "never"} ],
//     "horizon": 100000,
//     "seeds": [1, 2, ...],
//     "sweep": {"variable": "none" | "K" | "theta" | "V" | "beta", "values": [...]},   (optional)
//     "checkpoints": [100, 1000, ...],                   (optional, increasing)
//     "solver": {"max_iterations": 20000, "gap_tolerance": 1e-7,
//                "state_enumeration_cap": 16},           (optional)
//     "output": "results.csv"                            (optional)
//   }

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aoi/error.hpp"
#include "aoi/model.hpp"
#include "aoi/optimizer.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

struct GoodBadTemplate {
  double gamma_good = 0.9;
  double gamma_bad = 0.1;
  std::size_t n_bad = 0;

  bool operator==(const GoodBadTemplate&) const = default;
};

struct NetworkSpec {
  std::size_t n_links = 0;
  std::vector<double> weights;  // empty: all 1; size 1: uniform
  std::optional<std::vector<double>> gamma;
  std::optional<GoodBadTemplate> good_bad;

  bool operator==(const NetworkSpec&) const = default;
};

enum class InterferenceKind { k_of_n, conflict_graph, explicit_sets };

struct InterferenceSpec {
  InterferenceKind kind = InterferenceKind::k_of_n;
  std::size_t k = 1;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> sets;

  bool operator==(const InterferenceSpec&) const = default;
};

enum class PolicyKind { virtual_queue, age_based, stationary_optimal, s_only_optimal, priority, never };

struct PolicySpec {
  PolicyKind kind = PolicyKind::virtual_queue;
  double v_param = 1.0;
  double beta = 1.0;
  std::vector<std::size_t> order;

  bool operator==(const PolicySpec&) const = default;
};

enum class SweepVariable { none, K, theta, V, beta };

struct ExperimentConfig {
  std::string description;
  NetworkSpec network;
  InterferenceSpec interference;
  std::vector<PolicySpec> policies;
  std::int64_t horizon = 100000;
  std::vector<std::uint64_t> seeds{1};
  SweepVariable sweep = SweepVariable::none;
  std::vector<double> sweep_values;
  std::vector<std::int64_t> checkpoints;
  SolverSettings solver;
  std::string output;

  bool operator==(const ExperimentConfig& o) const {
    return description == o.description && network == o.network && interference == o.interference &&
           policies == o.policies && horizon == o.horizon && seeds == o.seeds && sweep == o.sweep &&
           sweep_values == o.sweep_values && checkpoints == o.checkpoints &&
           solver.max_iterations == o.solver.max_iterations && solver.gap_tolerance == o.solver.gap_tolerance &&
           solver.state_enumeration_cap == o.solver.state_enumeration_cap && output == o.output;
  }
};

inline std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::K: return "K";
    case SweepVariable::theta: return "theta";
    case SweepVariable::V: return "V";
    case SweepVariable::beta: return "beta";
    case SweepVariable::none: break;
  }
  return "none";
}

inline std::string policy_type_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::virtual_queue: return "virtual_queue";
    case PolicyKind::age_based: return "age_based";
    case PolicyKind::stationary_optimal: return "stationary_optimal";
    case PolicyKind::s_only_optimal: return "s_only_optimal";
    case PolicyKind::priority: return "priority";
    case PolicyKind::never: return "never";
  }
  return "?";
}

namespace detail {

// JSON pointer -> 1-based line where that member or element starts.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) { scan(text); }

  std::size_t line_of(std::string pointer) const {
    for (;;) {
      if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
      if (pointer.empty()) return 1;
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  struct Frame {
    bool object;
    std::string path;
    std::string key;
    std::size_t index = 0;
    bool expect_key = true;
  };

  void scan(const std::string& text) {
    std::vector<Frame> stack;
    std::size_t line = 1;
    auto child_path = [&]() -> std::string {
      if (stack.empty()) return "";
      const Frame& f = stack.back();
      return f.path + "/" + (f.object ? f.key : std::to_string(f.index));
    };
    auto value_start = [&]() {
      if (!stack.empty() && !stack.back().object) lines_.emplace(child_path(), line);
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
      } else if (c == '"') {
        std::string s;
        for (++i; i < text.size() && text[i] != '"'; ++i) {
          if (text[i] == '\\' && i + 1 < text.size()) ++i;
          if (text[i] == '\n') ++line;
          s += text[i];
        }
        if (!stack.empty() && stack.back().object && stack.back().expect_key) {
          stack.back().key = s;
          stack.back().expect_key = false;
          lines_.emplace(child_path(), line);
        } else {
          value_start();
        }
      } else if (c == '{' || c == '[') {
        value_start();
        std::string p = child_path();
        stack.push_back({c == '{', std::move(p), "", 0, true});
      } else if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
      } else if (c == ',') {
        if (!stack.empty()) {
          if (stack.back().object)
            stack.back().expect_key = true;
          else
            ++stack.back().index;
        }
      } else if (c == '-' || c == '+' || (c >= '0' && c <= '9') || c == 't' || c == 'f' || c == 'n') {
        value_start();
        while (i + 1 < text.size() && std::string(",]}\n \t\r").find(text[i + 1]) == std::string::npos) ++i;
      }
    }
  }

  std::map<std::string, std::size_t> lines_;
};

class Reader {
 public:
  Reader(const nlohmann::json& root, const LineIndex& lines) : root_(root), lines_(lines) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    throw ConfigError((pointer.empty() ? std::string("/") : pointer) + ": " + what, lines_.line_of(pointer));
  }

  const nlohmann::json& at(const std::string& pointer) const { return root_.at(nlohmann::json::json_pointer(pointer)); }
  bool has(const std::string& pointer) const { return root_.contains(nlohmann::json::json_pointer(pointer)); }

  void only_keys(const std::string& pointer, std::initializer_list<const char*> allowed) const {
    const auto& obj = at(pointer);
    if (!obj.is_object()) fail(pointer, "expected an object");
    for (const auto& [key, _] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        fail(pointer + "/" + key, "unknown key '" + key + "'");
    }
  }

  const nlohmann::json& require(const std::string& pointer) const {
    if (!has(pointer)) fail(pointer.substr(0, pointer.rfind('/')), "missing required key '" + pointer.substr(pointer.rfind('/') + 1) + "'");
    return at(pointer);
  }

  double number(const std::string& pointer) const {
    const auto& v = require(pointer);
    if (!v.is_number()) fail(pointer, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(pointer, "expected a finite number");
    return d;
  }

  std::uint64_t unsigned_integer(const std::string& pointer) const {
    const auto& v = require(pointer);
    if (!v.is_number_unsigned()) fail(pointer, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& pointer) const {
    const auto& v = require(pointer);
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& pointer) const {
    const auto& v = require(pointer);
    if (!v.is_array()) fail(pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(pointer + "/" + std::to_string(i)));
    return out;
  }

  std::vector<std::uint64_t> unsigned_integers(const std::string& pointer) const {
    const auto& v = require(pointer);
    if (!v.is_array()) fail(pointer, "expected an array of integers");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(unsigned_integer(pointer + "/" + std::to_string(i)));
    return out;
  }

 private:
  const nlohmann::json& root_;
  const LineIndex& lines_;
};

inline std::vector<std::size_t> to_indices(const std::vector<std::uint64_t>& v) {
  return {v.begin(), v.end()};
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line);
  }
  const detail::LineIndex lines(text);
  const detail::Reader r(root, lines);
  if (!root.is_object()) r.fail("", "top level must be an object");
  r.only_keys("", {"description", "network", "interference", "policies", "horizon", "seeds", "sweep", "checkpoints",
                   "solver", "output"});

  ExperimentConfig cfg;
  if (r.has("/description")) cfg.description = r.string("/description");
  if (r.has("/output")) cfg.output = r.string("/output");

  // network
  r.require("/network");
  r.only_keys("/network", {"n_links", "weights", "gamma", "template"});
  auto& net = cfg.network;
  net.n_links = r.unsigned_integer("/network/n_links");
  if (net.n_links < 1 || net.n_links > kMaxLinks)
    r.fail("/network/n_links", "must be between 1 and " + std::to_string(kMaxLinks));
  if (r.has("/network/weights")) {
    if (r.at("/network/weights").is_number())
      net.weights = {r.number("/network/weights")};
    else
      net.weights = r.numbers("/network/weights");
    if (net.weights.size() != 1 && net.weights.size() != net.n_links)
      r.fail("/network/weights", "expected a number or an array of n_links numbers");
    for (double w : net.weights)
      if (!(w > 0.0)) r.fail("/network/weights", "weights must be positive");
  }
  const bool has_gamma = r.has("/network/gamma"), has_template = r.has("/network/template");
  if (has_gamma == has_template) r.fail("/network", "give exactly one of 'gamma' or 'template'");
  if (has_gamma) {
    net.gamma = r.numbers("/network/gamma");
    if (net.gamma->size() != net.n_links) r.fail("/network/gamma", "expected n_links entries");
    for (std::size_t e = 0; e < net.n_links; ++e)
      if (!((*net.gamma)[e] > 0.0 && (*net.gamma)[e] <= 1.0))
        r.fail("/network/gamma/" + std::to_string(e), "gamma must lie in (0, 1]");
  } else {
    r.only_keys("/network/template", {"gamma_good", "gamma_bad", "n_bad"});
    GoodBadTemplate t;
    t.gamma_good = r.number("/network/template/gamma_good");
    t.gamma_bad = r.number("/network/template/gamma_bad");
    t.n_bad = r.unsigned_integer("/network/template/n_bad");
    for (const char* key : {"gamma_good", "gamma_bad"}) {
      const double g = r.number(std::string("/network/template/") + key);
      if (!(g > 0.0 && g <= 1.0)) r.fail(std::string("/network/template/") + key, "gamma must lie in (0, 1]");
    }
    if (t.n_bad > net.n_links) r.fail("/network/template/n_bad", "n_bad exceeds n_links");
    net.good_bad = t;
  }

  // interference
  r.require("/interference");
  const std::string type = r.string("/interference/type");
  auto& im = cfg.interference;
  if (type == "k_of_n") {
    r.only_keys("/interference", {"type", "k"});
    im.kind = InterferenceKind::k_of_n;
    im.k = r.unsigned_integer("/interference/k");
    if (im.k < 1 || im.k > net.n_links) r.fail("/interference/k", "K must satisfy 1 <= K <= n_links");
  } else if (type == "conflict_graph") {
    r.only_keys("/interference", {"type", "edges"});
    im.kind = InterferenceKind::conflict_graph;
    const auto& edges = r.require("/interference/edges");
    if (!edges.is_array()) r.fail("/interference/edges", "expected an array of [a, b] pairs");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string p = "/interference/edges/" + std::to_string(i);
      auto pair = r.unsigned_integers(p);
      if (pair.size() != 2) r.fail(p, "an edge is a pair [a, b]");
      if (pair[0] >= net.n_links || pair[1] >= net.n_links || pair[0] == pair[1]) r.fail(p, "invalid edge endpoints");
      im.edges.emplace_back(pair[0], pair[1]);
    }
  } else if (type == "explicit_sets") {
    r.only_keys("/interference", {"type", "sets"});
    im.kind = InterferenceKind::explicit_sets;
    const auto& sets = r.require("/interference/sets");
    if (!sets.is_array()) r.fail("/interference/sets", "expected an array of link-index arrays");
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string p = "/interference/sets/" + std::to_string(i);
      auto s = detail::to_indices(r.unsigned_integers(p));
      for (auto e : s)
        if (e >= net.n_links) r.fail(p, "link index " + std::to_string(e) + " out of range");
      im.sets.push_back(std::move(s));
    }
  } else {
    r.fail("/interference/type", "unknown interference type '" + type + "'");
  }

  // policies
  const auto& pols = r.require("/policies");
  if (!pols.is_array() || pols.empty()) r.fail("/policies", "expected a nonempty array");
  for (std::size_t i = 0; i < pols.size(); ++i) {
    const std::string p = "/policies/" + std::to_string(i);
    const std::string kind = r.string(p + "/type");
    PolicySpec ps;
    if (kind == "virtual_queue") {
      r.only_keys(p, {"type", "V"});
      ps.kind = PolicyKind::virtual_queue;
      ps.v_param = r.number(p + "/V");
      if (!(ps.v_param > 0.0)) r.fail(p + "/V", "V must be positive");
    } else if (kind == "age_based") {
      r.only_keys(p, {"type", "beta"});
      ps.kind = PolicyKind::age_based;
      ps.beta = r.number(p + "/beta");
    } else if (kind == "stationary_optimal") {
      r.only_keys(p, {"type"});
      ps.kind = PolicyKind::stationary_optimal;
    } else if (kind == "s_only_optimal") {
      r.only_keys(p, {"type"});
      ps.kind = PolicyKind::s_only_optimal;
    } else if (kind == "priority") {
      r.only_keys(p, {"type", "order"});
      ps.kind = PolicyKind::priority;
      if (r.has(p + "/order")) {
        ps.order = detail::to_indices(r.unsigned_integers(p + "/order"));
        auto sorted = ps.order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t e = 0; e < sorted.size(); ++e)
          if (sorted[e] != e || sorted.size() != net.n_links) r.fail(p + "/order", "order must be a permutation of the links");
      }
    } else if (kind == "never") {
      r.only_keys(p, {"type"});
      ps.kind = PolicyKind::never;
    } else {
      r.fail(p + "/type", "unknown policy type '" + kind + "'");
    }
    cfg.policies.push_back(std::move(ps));
  }

  cfg.horizon = static_cast<std::int64_t>(r.unsigned_integer("/horizon"));
  if (cfg.horizon < 1 || cfg.horizon > kMaxHorizon) r.fail("/horizon", "horizon must be between 1 and 2^31");
  cfg.seeds = r.unsigned_integers("/seeds");
  if (cfg.seeds.empty()) r.fail("/seeds", "at least one seed is required");

  if (r.has("/sweep")) {
    r.only_keys("/sweep", {"variable", "values"});
    const std::string var = r.string("/sweep/variable");
    if (var == "none")
      cfg.sweep = SweepVariable::none;
    else if (var == "K")
      cfg.sweep = SweepVariable::K;
    else if (var == "theta")
      cfg.sweep = SweepVariable::theta;
    else if (var == "V")
      cfg.sweep = SweepVariable::V;
    else if (var == "beta")
      cfg.sweep = SweepVariable::beta;
    else
      r.fail("/sweep/variable", "unknown sweep variable '" + var + "'");
    if (cfg.sweep != SweepVariable::none) {
      cfg.sweep_values = r.numbers("/sweep/values");
      if (cfg.sweep_values.empty()) r.fail("/sweep/values", "sweep grid must be nonempty");
    } else if (r.has("/sweep/values")) {
      cfg.sweep_values = r.numbers("/sweep/values");
    }
    auto has_policy = [&](PolicyKind k) {
      return std::any_of(cfg.policies.begin(), cfg.policies.end(), [&](const PolicySpec& s) { return s.kind == k; });
    };
    for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
      const double v = cfg.sweep_values[i];
      const std::string p = "/sweep/values/" + std::to_string(i);
      switch (cfg.sweep) {
        case SweepVariable::K:
          if (cfg.interference.kind != InterferenceKind::k_of_n) r.fail("/sweep/variable", "a K sweep needs k_of_n interference");
          if (v != std::floor(v) || v < 1 || v > static_cast<double>(net.n_links)) r.fail(p, "K must be an integer in [1, n_links]");
          break;
        case SweepVariable::theta:
          if (!net.good_bad) r.fail("/sweep/variable", "a theta sweep needs a network template");
          if (v < 0.0 || v > 1.0) r.fail(p, "theta must lie in [0, 1]");
          break;
        case SweepVariable::V:
          if (!has_policy(PolicyKind::virtual_queue)) r.fail("/sweep/variable", "a V sweep needs a virtual_queue policy");
          if (!(v > 0.0)) r.fail(p, "V must be positive");
          break;
        case SweepVariable::beta:
          if (!has_policy(PolicyKind::age_based)) r.fail("/sweep/variable", "a beta sweep needs an age_based policy");
          break;
        case SweepVariable::none:
          break;
      }
    }
  }

  if (r.has("/checkpoints")) {
    for (auto c : r.unsigned_integers("/checkpoints")) cfg.checkpoints.push_back(static_cast<std::int64_t>(c));
    if (!std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()) ||
        std::adjacent_find(cfg.checkpoints.begin(), cfg.checkpoints.end()) != cfg.checkpoints.end())
      r.fail("/checkpoints", "checkpoints must be strictly increasing");
    for (auto c : cfg.checkpoints)
      if (c < 1 || c > cfg.horizon) r.fail("/checkpoints", "checkpoints must lie in [1, horizon]");
  }

  if (r.has("/solver")) {
    r.only_keys("/solver", {"max_iterations", "gap_tolerance", "state_enumeration_cap"});
    if (r.has("/solver/max_iterations")) cfg.solver.max_iterations = r.unsigned_integer("/solver/max_iterations");
    if (r.has("/solver/gap_tolerance")) cfg.solver.gap_tolerance = r.number("/solver/gap_tolerance");
    if (r.has("/solver/state_enumeration_cap"))
      cfg.solver.state_enumeration_cap = r.unsigned_integer("/solver/state_enumeration_cap");
    if (!(cfg.solver.gap_tolerance > 0.0)) r.fail("/solver/gap_tolerance", "tolerance must be positive");
    if (cfg.solver.max_iterations == 0) r.fail("/solver/max_iterations", "must be positive");
  }
  for (std::size_t i = 0; i < cfg.policies.size(); ++i)
    if (cfg.policies[i].kind == PolicyKind::s_only_optimal && net.n_links > cfg.solver.state_enumeration_cap)
      r.fail("/policies/" + std::to_string(i), "s_only_optimal needs n_links <= state_enumeration_cap (" +
                                                   std::to_string(cfg.solver.state_enumeration_cap) + ")");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  using J = nlohmann::ordered_json;
  J j;
  if (!cfg.description.empty()) j["description"] = cfg.description;
  J net;
  net["n_links"] = cfg.network.n_links;
  if (cfg.network.weights.size() == 1)
    net["weights"] = cfg.network.weights[0];
  else if (!cfg.network.weights.empty())
    net["weights"] = cfg.network.weights;
  if (cfg.network.gamma) net["gamma"] = *cfg.network.gamma;
  if (cfg.network.good_bad)
    net["template"] = {{"gamma_good", cfg.network.good_bad->gamma_good},
                       {"gamma_bad", cfg.network.good_bad->gamma_bad},
                       {"n_bad", cfg.network.good_bad->n_bad}};
  j["network"] = net;
  J im;
  switch (cfg.interference.kind) {
    case InterferenceKind::k_of_n:
      im = {{"type", "k_of_n"}, {"k", cfg.interference.k}};
      break;
    case InterferenceKind::conflict_graph: {
      J edges = J::array();
      for (auto [a, b] : cfg.interference.edges) edges.push_back({a, b});
      im = {{"type", "conflict_graph"}, {"edges", edges}};
      break;
    }
    case InterferenceKind::explicit_sets:
      im = {{"type", "explicit_sets"}, {"sets", cfg.interference.sets}};
      break;
  }
  j["interference"] = im;
  J pols = J::array();
  for (const auto& p : cfg.policies) {
    J pj = {{"type", policy_type_name(p.kind)}};
    if (p.kind == PolicyKind::virtual_queue) pj["V"] = p.v_param;
    if (p.kind == PolicyKind::age_based) pj["beta"] = p.beta;
    if (p.kind == PolicyKind::priority && !p.order.empty()) pj["order"] = p.order;
    pols.push_back(pj);
  }
  j["policies"] = pols;
  j["horizon"] = cfg.horizon;
  j["seeds"] = cfg.seeds;
  if (cfg.sweep != SweepVariable::none) j["sweep"] = {{"variable", to_string(cfg.sweep)}, {"values", cfg.sweep_values}};
  if (!cfg.checkpoints.empty()) j["checkpoints"] = cfg.checkpoints;
  const SolverSettings defaults;
  if (cfg.solver.max_iterations != defaults.max_iterations || cfg.solver.gap_tolerance != defaults.gap_tolerance ||
      cfg.solver.state_enumeration_cap != defaults.state_enumeration_cap)
    j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                   {"gap_tolerance", cfg.solver.gap_tolerance},
                   {"state_enumeration_cap", cfg.solver.state_enumeration_cap}};
  if (!cfg.output.empty()) j["output"] = cfg.output;
  return j;
}

}  // namespace aoi
