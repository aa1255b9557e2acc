#include "clsnet/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "clsnet/protocols.hpp"

namespace clsnet {
namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    std::ostringstream os;
    os << source_;
    if (mark.line >= 0) os << ':' << mark.line + 1 << ':' << mark.column + 1;
    os << ": " << message;
    throw Error(ErrorCode::config, os.str());
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node.Mark(), what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& map, const std::string& what, const std::set<std::string>& keys) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!keys.contains(key)) fail(kv.first.Mark(), "unknown key '" + key + "' in " + what);
    }
  }

  YAML::Node required(const YAML::Node& map, const std::string& key, const std::string& what) const {
    YAML::Node n = map[key];
    if (!n) fail(map.Mark(), what + " needs '" + key + "'");
    return n;
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node.Mark(), what + " must be a scalar");
    return node.Scalar();
  }

  double real(const YAML::Node& node, const std::string& what) const {
    const std::string s = text(node, what);
    double value = 0.0;
    try {
      value = node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node.Mark(), what + ": expected a number, got '" + s + "'");
    }
    if (!std::isfinite(value)) fail(node.Mark(), what + " must be finite");
    return value;
  }

  long long integer(const YAML::Node& node, const std::string& what) const {
    const std::string s = text(node, what);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(node.Mark(), what + ": expected an integer, got '" + s + "'");
    }
    return value;
  }

  std::size_t count(const YAML::Node& node, const std::string& what) const {
    const long long v = integer(node, what);
    if (v < 0) fail(node.Mark(), what + " must be non-negative");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t unsigned64(const YAML::Node& node, const std::string& what) const {
    const std::string s = text(node, what);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(node.Mark(), what + ": expected a non-negative integer, got '" + s + "'");
    }
    return value;
  }

  bool boolean(const YAML::Node& node, const std::string& what) const {
    const std::string s = text(node, what);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(node.Mark(), what + ": expected true or false, got '" + s + "'");
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node.Mark(), what + " must be a list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(real(item, what));
    return out;
  }

  /// Scalar or list; a scalar is broadcast to `n` entries.
  std::vector<double> broadcast(const YAML::Node& node, std::size_t n, const std::string& what) const {
    if (node.IsScalar()) return std::vector<double>(n, real(node, what));
    auto out = reals(node, what);
    if (out.size() != n) {
      fail(node.Mark(), what + " needs " + std::to_string(n) + " values, got " + std::to_string(out.size()));
    }
    return out;
  }

  Site site(const YAML::Node& node, std::size_t dimension, const std::string& what) const {
    const std::size_t s = count(node, what);
    if (s >= dimension) {
      fail(node.Mark(), what + ": site " + std::to_string(s) + " does not exist in a " +
                            std::to_string(dimension) + "-site system");
    }
    return s;
  }

  std::pair<Site, Site> site_pair(const YAML::Node& node, std::size_t dimension, const std::string& what) const {
    if (!node.IsSequence() || node.size() != 2) fail(node.Mark(), what + " must be a pair [a, b]");
    const Site a = site(node[0], dimension, what);
    const Site b = site(node[1], dimension, what);
    if (a == b) fail(node.Mark(), what + " needs two distinct sites");
    return {a, b};
  }

  std::pair<double, double> range(const YAML::Node& node, const std::string& what) const {
    auto v = reals(node, what);
    if (v.size() != 2 || !(v[0] <= v[1])) fail(node.Mark(), what + " must be [low, high] with low <= high");
    return {v[0], v[1]};
  }

 private:
  std::string source_;
};

std::size_t system_dimension(const ScenarioConfig& c) {
  if (c.system == "star") return star::size;
  if (c.system == "seven") return seven::size;
  return 5 * c.cells_x * c.cells_y;
}

std::pair<std::size_t, std::size_t> parameter_lengths(const std::string& system) {
  if (system == "star") return {4, 5};
  if (system == "seven") return {6, 7};
  return {1, 1};
}

void default_parameters(ScenarioConfig& c) {
  if (c.system == "star") {
    c.couplings.assign(4, 0.25);
    c.potentials.assign(5, 0.5);
  } else if (c.system == "seven") {
    const double r3 = std::sqrt(3.0);
    c.couplings = {1.0, 1.0, r3, r3, 1.0, 1.0};
    c.potentials.assign(7, 0.0);
  } else {
    c.couplings = {0.25};
    c.potentials = {0.5};
  }
}

bool problem_matches(const std::string& system, const std::string& problem) {
  return problem.rfind(system + "-", 0) == 0;
}

StateSpec parse_state(const Reader& r, const YAML::Node& node, std::size_t dimension, const std::string& what) {
  StateSpec s;
  if (node.IsScalar()) {
    s.name = node.Scalar();
    static const std::set<std::string> names = {"initial", "final", "left", "right", "center"};
    if (!names.contains(s.name)) {
      r.fail(node.Mark(), what + ": unknown state '" + s.name + "' (initial, final, left, right, center)");
    }
    if (dimension != star::size && dimension != seven::size) {
      r.fail(node.Mark(), what + ": named states exist only for the star and seven-site systems");
    }
    return s;
  }
  if (!node.IsMap()) r.fail(node.Mark(), what + " must be a state name or {sites, amplitudes}");
  r.allow_keys(node, what, {"sites", "amplitudes"});
  const YAML::Node sites = r.required(node, "sites", what);
  if (!sites.IsSequence() || sites.size() == 0) r.fail(sites.Mark(), what + ".sites must be a non-empty list");
  for (const auto& item : sites) s.sites.push_back(r.site(item, dimension, what + ".sites"));
  s.amplitudes = r.reals(r.required(node, "amplitudes", what), what + ".amplitudes");
  if (s.amplitudes.size() != s.sites.size()) {
    r.fail(node.Mark(), what + ": sites and amplitudes differ in length");
  }
  return s;
}

CoefficientSpec parse_coefficients(const Reader& r, const YAML::Node& node) {
  r.require_map(node, "action.coefficients");
  r.allow_keys(node, "action.coefficients", {"x", "xp", "omega"});
  CoefficientSpec c;
  c.x = r.reals(r.required(node, "x", "action.coefficients"), "action.coefficients.x");
  c.xp = r.reals(r.required(node, "xp", "action.coefficients"), "action.coefficients.xp");
  c.omega = r.reals(r.required(node, "omega", "action.coefficients"), "action.coefficients.omega");
  return c;
}

void parse_simulate(const Reader& r, const YAML::Node& a, ScenarioConfig& c) {
  const YAML::Node pnode = r.required(a, "protocol", "action");
  c.protocol = r.text(pnode, "action.protocol");
  const std::size_t dim = system_dimension(c);

  std::set<std::string> keys = {"kind", "protocol", "sample_dt"};
  const bool star_flip = c.protocol == "phase-flip-transfer" || c.protocol == "hopping-flip-transfer";
  const bool star_gen = c.protocol == "generation" || c.protocol == "reverse-generation" ||
                        c.protocol == "piecewise-transfer";
  if (c.protocol == "free") {
    keys.insert({"duration", "initial", "target", "events", "pulses"});
  } else if (c.protocol == "crab") {
    if (c.system == "dll") r.fail(pnode.Mark(), "protocol 'crab' needs a star or seven system");
    keys.insert({"problem", "coefficients"});
  } else if (c.system == "star" && star_flip) {
    keys.insert({"k1", "k2", "first_site", "second_site", "first_coupling", "second_coupling"});
  } else if (c.system == "star" && star_gen) {
    keys.insert({"branch", "k1p", "k2p", "coupling"});
  } else if (c.system == "seven" && star_flip) {
    keys.insert({"k"});
  } else {
    r.fail(pnode.Mark(), "protocol '" + c.protocol + "' is not available for system '" + c.system + "'");
  }
  r.allow_keys(a, "action", keys);

  auto opt_int = [&](const char* key, int& field) {
    if (a[key]) field = static_cast<int>(r.integer(a[key], std::string("action.") + key));
  };
  opt_int("k1", c.k1);
  opt_int("k2", c.k2);
  opt_int("branch", c.branch);
  opt_int("k1p", c.k1p);
  opt_int("k2p", c.k2p);
  opt_int("k", c.k);
  if (a["first_site"]) c.first_site = r.site(a["first_site"], dim, "action.first_site");
  if (a["second_site"]) c.second_site = r.site(a["second_site"], dim, "action.second_site");
  opt_int("first_coupling", c.first_coupling);
  opt_int("second_coupling", c.second_coupling);
  for (const char* key : {"first_coupling", "second_coupling"}) {
    if (a[key] && (r.integer(a[key], key) < 1 || r.integer(a[key], key) > 4)) {
      r.fail(a[key].Mark(), std::string("action.") + key + " must be a star coupling 1..4");
    }
  }
  if (a["coupling"]) c.generation_coupling = r.real(a["coupling"], "action.coupling");
  if (a["sample_dt"]) {
    c.sample_dt = r.real(a["sample_dt"], "action.sample_dt");
    if (c.sample_dt < 0.0) r.fail(a["sample_dt"].Mark(), "action.sample_dt must be >= 0");
  }

  if (c.protocol == "crab") {
    const YAML::Node prob = r.required(a, "problem", "action");
    c.problem = r.text(prob, "action.problem");
    try {
      ansatz_kind_from_string(c.problem);
    } catch (const Error&) {
      r.fail(prob.Mark(), "unknown problem '" + c.problem + "'");
    }
    if (!problem_matches(c.system, c.problem)) {
      r.fail(prob.Mark(), "problem '" + c.problem + "' does not run on system '" + c.system + "'");
    }
    if (a["coefficients"]) c.coefficients = parse_coefficients(r, a["coefficients"]);
  }

  if (c.protocol == "free") {
    const YAML::Node d = r.required(a, "duration", "action");
    c.duration = r.real(d, "action.duration");
    if (c.duration < 0.0) r.fail(d.Mark(), "action.duration must be >= 0");
    c.initial = parse_state(r, r.required(a, "initial", "action"), dim, "action.initial");
    c.target = a["target"] ? parse_state(r, a["target"], dim, "action.target") : c.initial;
    if (a["events"]) {
      const YAML::Node ev = a["events"];
      if (!ev.IsSequence()) r.fail(ev.Mark(), "action.events must be a list");
      for (const auto& e : ev) {
        r.require_map(e, "event");
        EventSpec spec;
        spec.time = r.real(r.required(e, "time", "event"), "event.time");
        if (spec.time < 0.0 || spec.time > c.duration) r.fail(e.Mark(), "event time outside [0, duration]");
        spec.type = r.text(r.required(e, "type", "event"), "event.type");
        if (spec.type == "phase-flip") {
          r.allow_keys(e, "event", {"time", "type", "site"});
          spec.site = r.site(r.required(e, "site", "event"), dim, "event.site");
        } else if (spec.type == "hopping-flip") {
          r.allow_keys(e, "event", {"time", "type", "entry"});
          auto [x, y] = r.site_pair(r.required(e, "entry", "event"), dim, "event.entry");
          spec.entry = Entry(x, y);
        } else {
          r.fail(e["type"].Mark(), "event type must be phase-flip or hopping-flip");
        }
        c.events.push_back(spec);
      }
    }
    if (a["pulses"]) {
      const YAML::Node ps = a["pulses"];
      if (!ps.IsSequence()) r.fail(ps.Mark(), "action.pulses must be a list");
      for (const auto& p : ps) {
        r.require_map(p, "pulse");
        r.allow_keys(p, "pulse", {"entry", "kind", "params", "gain", "time_sign", "time_shift"});
        auto [x, y] = r.site_pair(r.required(p, "entry", "pulse"), dim, "pulse.entry");
        const YAML::Node kind = r.required(p, "kind", "pulse");
        try {
          const auto k = pulse_kind_from_string(r.text(kind, "pulse.kind"));
          auto params = r.reals(r.required(p, "params", "pulse"), "pulse.params");
          const double gain = p["gain"] ? r.real(p["gain"], "pulse.gain") : 1.0;
          const double sign = p["time_sign"] ? r.real(p["time_sign"], "pulse.time_sign") : 1.0;
          const double shift = p["time_shift"] ? r.real(p["time_shift"], "pulse.time_shift") : 0.0;
          c.pulses.push_back({Entry(x, y), Pulse::from_parts(k, std::move(params), gain, sign, shift)});
        } catch (const Error& e) {
          r.fail(p.Mark(), e.what());
        }
      }
    }
  }
}

void parse_optimize(const Reader& r, const YAML::Node& a, ScenarioConfig& c) {
  r.allow_keys(a, "action",
               {"kind", "problem", "mode", "coefficients", "restarts", "omega_range", "amplitude_range",
                "max_evals", "spread_tol", "optimize_omega", "objective_steps", "workers"});
  const YAML::Node prob = r.required(a, "problem", "action");
  c.problem = r.text(prob, "action.problem");
  try {
    ansatz_kind_from_string(c.problem);
  } catch (const Error&) {
    r.fail(prob.Mark(), "unknown problem '" + c.problem + "'");
  }
  if (!problem_matches(c.system, c.problem)) {
    r.fail(prob.Mark(), "problem '" + c.problem + "' does not run on system '" + c.system + "'");
  }
  if (a["mode"]) {
    c.mode = r.text(a["mode"], "action.mode");
    if (c.mode != "evaluate" && c.mode != "refine" && c.mode != "search") {
      r.fail(a["mode"].Mark(), "action.mode must be evaluate, refine or search");
    }
  }
  if (a["coefficients"]) c.coefficients = parse_coefficients(r, a["coefficients"]);
  if (a["restarts"]) {
    c.restarts = r.count(a["restarts"], "action.restarts");
    if (c.restarts == 0) r.fail(a["restarts"].Mark(), "action.restarts must be >= 1");
  }
  if (a["omega_range"]) c.omega_range = r.range(a["omega_range"], "action.omega_range");
  if (a["amplitude_range"]) c.amplitude_range = r.range(a["amplitude_range"], "action.amplitude_range");
  if (a["max_evals"]) c.max_evals = r.count(a["max_evals"], "action.max_evals");
  if (a["spread_tol"]) c.spread_tol = r.real(a["spread_tol"], "action.spread_tol");
  if (a["optimize_omega"]) c.optimize_omega = r.boolean(a["optimize_omega"], "action.optimize_omega");
  if (a["objective_steps"]) c.objective_steps = r.count(a["objective_steps"], "action.objective_steps");
  if (a["workers"]) {
    c.workers = r.count(a["workers"], "action.workers");
    if (c.workers == 0) r.fail(a["workers"].Mark(), "action.workers must be >= 1");
  }
}

void parse_route(const Reader& r, const YAML::Node& a, ScenarioConfig& c) {
  r.allow_keys(a, "action", {"kind", "routes", "ramp", "stagger", "protocol", "k2"});
  if (c.system != "dll") r.fail(a["kind"].Mark(), "action 'route' needs system kind 'dll'");
  const std::size_t dim = system_dimension(c);
  const YAML::Node routes = r.required(a, "routes", "action");
  if (!routes.IsSequence() || routes.size() == 0) r.fail(routes.Mark(), "action.routes must be a non-empty list");
  for (const auto& item : routes) {
    r.require_map(item, "route");
    r.allow_keys(item, "route", {"from", "to"});
    auto [a0, a1] = r.site_pair(r.required(item, "from", "route"), dim, "route.from");
    auto [b0, b1] = r.site_pair(r.required(item, "to", "route"), dim, "route.to");
    c.routes.push_back({Dimer{a0, a1}, Dimer{b0, b1}});
  }
  if (a["ramp"]) {
    c.ramp = r.real(a["ramp"], "action.ramp");
    if (c.ramp < 0.0) r.fail(a["ramp"].Mark(), "action.ramp must be >= 0");
  }
  if (a["stagger"]) c.stagger = r.boolean(a["stagger"], "action.stagger");
  if (a["protocol"]) {
    c.jump_protocol = r.text(a["protocol"], "action.protocol");
    if (c.jump_protocol != "phase-flip" && c.jump_protocol != "hopping-flip") {
      r.fail(a["protocol"].Mark(), "action.protocol must be phase-flip or hopping-flip");
    }
  }
  if (a["k2"]) {
    c.k2 = static_cast<int>(r.integer(a["k2"], "action.k2"));
    if (c.k2 < 0) r.fail(a["k2"].Mark(), "action.k2 must be >= 0");
  }
}

ScenarioConfig parse_root(const Reader& r, const YAML::Node& root) {
  if (!root || root.IsNull()) r.fail(YAML::Mark::null_mark(), "empty config");
  r.require_map(root, "config");
  r.allow_keys(root, "config", {"system", "parameters", "action", "integrator", "seed", "output"});
  ScenarioConfig c;

  const YAML::Node sys = r.required(root, "system", "config");
  r.require_map(sys, "system");
  r.allow_keys(sys, "system", {"kind", "cells"});
  const YAML::Node kind = r.required(sys, "kind", "system");
  c.system = r.text(kind, "system.kind");
  if (c.system != "star" && c.system != "seven" && c.system != "dll") {
    r.fail(kind.Mark(), "system.kind must be star, seven or dll");
  }
  if (c.system == "dll") {
    const YAML::Node cells = r.required(sys, "cells", "system");
    if (!cells.IsSequence() || cells.size() != 2) r.fail(cells.Mark(), "system.cells must be [cells_x, cells_y]");
    c.cells_x = r.count(cells[0], "system.cells");
    c.cells_y = r.count(cells[1], "system.cells");
    if (c.cells_x == 0 || c.cells_y == 0) r.fail(cells.Mark(), "system.cells must be positive");
  } else if (sys["cells"]) {
    r.fail(sys["cells"].Mark(), "system.cells applies only to dll");
  }

  default_parameters(c);
  if (const YAML::Node p = root["parameters"]) {
    r.require_map(p, "parameters");
    r.allow_keys(p, "parameters", {"couplings", "potentials"});
    const auto [nc, nv] = parameter_lengths(c.system);
    if (p["couplings"]) c.couplings = r.broadcast(p["couplings"], nc, "parameters.couplings");
    if (p["potentials"]) c.potentials = r.broadcast(p["potentials"], nv, "parameters.potentials");
  }

  const YAML::Node a = r.required(root, "action", "config");
  r.require_map(a, "action");
  const YAML::Node akind = r.required(a, "kind", "action");
  c.action = r.text(akind, "action.kind");
  if (c.action == "spectrum") {
    r.allow_keys(a, "action", {"kind", "max_support"});
    if (a["max_support"]) {
      c.max_support = r.count(a["max_support"], "action.max_support");
      if (c.max_support == 0) r.fail(a["max_support"].Mark(), "action.max_support must be >= 1");
    }
  } else if (c.action == "simulate") {
    parse_simulate(r, a, c);
  } else if (c.action == "optimize") {
    parse_optimize(r, a, c);
  } else if (c.action == "route") {
    parse_route(r, a, c);
  } else {
    r.fail(akind.Mark(), "action.kind must be spectrum, simulate, optimize or route");
  }

  if (const YAML::Node in = root["integrator"]) {
    r.require_map(in, "integrator");
    r.allow_keys(in, "integrator", {"tol", "step"});
    if (in["tol"]) {
      c.tol = r.real(in["tol"], "integrator.tol");
      if (c.tol < 1e-14 || c.tol > 1e-6) r.fail(in["tol"].Mark(), "integrator.tol must lie in [1e-14, 1e-6]");
    }
    if (in["step"]) {
      c.step = r.real(in["step"], "integrator.step");
      if (!(c.step > 0.0)) r.fail(in["step"].Mark(), "integrator.step must be > 0");
    }
  }
  if (root["seed"]) c.seed = r.unsigned64(root["seed"], "seed");
  if (const YAML::Node out = root["output"]) {
    r.require_map(out, "output");
    r.allow_keys(out, "output", {"dir"});
    if (out["dir"]) c.output_dir = r.text(out["dir"], "output.dir");
  }
  return c;
}

// Canonical writer --------------------------------------------------------

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // Keep integral values typed as reals on the way back in.
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

void write_state(std::ostringstream& os, const char* key, const StateSpec& s) {
  if (!s.name.empty()) {
    os << "  " << key << ": " << s.name << "\n";
    return;
  }
  os << "  " << key << ":\n    sites: [";
  for (std::size_t i = 0; i < s.sites.size(); ++i) os << (i ? ", " : "") << s.sites[i];
  os << "]\n    amplitudes: " << list(s.amplitudes) << "\n";
}

void write_coefficients(std::ostringstream& os, const std::optional<CoefficientSpec>& c) {
  if (!c) return;
  os << "  coefficients:\n    x: " << list(c->x) << "\n    xp: " << list(c->xp) << "\n    omega: " << list(c->omega)
     << "\n";
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    r.fail(e.mark, e.msg);
  }
  try {
    return parse_root(r, root);
  } catch (const YAML::Exception& e) {
    r.fail(e.mark, e.msg);
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::config, path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string emit_scenario(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "system:\n  kind: " << c.system << "\n";
  if (c.system == "dll") os << "  cells: [" << c.cells_x << ", " << c.cells_y << "]\n";
  os << "parameters:\n  couplings: " << list(c.couplings) << "\n  potentials: " << list(c.potentials) << "\n";
  os << "action:\n  kind: " << c.action << "\n";
  if (c.action == "spectrum") {
    os << "  max_support: " << c.max_support << "\n";
  } else if (c.action == "simulate") {
    os << "  protocol: " << c.protocol << "\n";
    const bool flip = c.protocol == "phase-flip-transfer" || c.protocol == "hopping-flip-transfer";
    if (c.protocol == "crab") {
      os << "  problem: " << c.problem << "\n";
      write_coefficients(os, c.coefficients);
    } else if (c.protocol == "free") {
      os << "  duration: " << num(c.duration) << "\n";
      write_state(os, "initial", c.initial);
      write_state(os, "target", c.target);
      if (!c.events.empty()) {
        os << "  events:\n";
        for (const auto& e : c.events) {
          os << "    - {time: " << num(e.time) << ", type: " << e.type;
          if (e.type == "phase-flip") {
            os << ", site: " << e.site << "}\n";
          } else {
            os << ", entry: [" << e.entry.row << ", " << e.entry.col << "]}\n";
          }
        }
      }
      if (!c.pulses.empty()) {
        os << "  pulses:\n";
        for (const auto& p : c.pulses) {
          os << "    - {entry: [" << p.entry.row << ", " << p.entry.col << "], kind: " << to_string(p.pulse.kind())
             << ", params: " << list(p.pulse.params()) << ", gain: " << num(p.pulse.gain())
             << ", time_sign: " << num(p.pulse.time_sign()) << ", time_shift: " << num(p.pulse.time_shift())
             << "}\n";
        }
      }
    } else if (c.system == "star" && flip) {
      os << "  k1: " << c.k1 << "\n  k2: " << c.k2 << "\n  first_site: " << c.first_site
         << "\n  second_site: " << c.second_site << "\n  first_coupling: " << c.first_coupling
         << "\n  second_coupling: " << c.second_coupling << "\n";
    } else if (c.system == "star") {
      os << "  branch: " << c.branch << "\n  k1p: " << c.k1p << "\n  k2p: " << c.k2p << "\n";
      if (c.generation_coupling) os << "  coupling: " << num(*c.generation_coupling) << "\n";
    } else {
      os << "  k: " << c.k << "\n";
    }
    os << "  sample_dt: " << num(c.sample_dt) << "\n";
  } else if (c.action == "optimize") {
    os << "  problem: " << c.problem << "\n  mode: " << c.mode << "\n";
    write_coefficients(os, c.coefficients);
    os << "  restarts: " << c.restarts << "\n  omega_range: " << list({c.omega_range.first, c.omega_range.second})
       << "\n  amplitude_range: " << list({c.amplitude_range.first, c.amplitude_range.second})
       << "\n  max_evals: " << c.max_evals << "\n  spread_tol: " << num(c.spread_tol)
       << "\n  optimize_omega: " << (c.optimize_omega ? "true" : "false")
       << "\n  objective_steps: " << c.objective_steps << "\n  workers: " << c.workers << "\n";
  } else if (c.action == "route") {
    os << "  routes:\n";
    for (const auto& rt : c.routes) {
      os << "    - {from: [" << rt.from.first << ", " << rt.from.second << "], to: [" << rt.to.first << ", "
         << rt.to.second << "]}\n";
    }
    os << "  ramp: " << num(c.ramp) << "\n";
    if (c.stagger) os << "  stagger: true\n";
    os << "  protocol: " << c.jump_protocol << "\n  k2: " << c.k2 << "\n";
  }
  os << "integrator:\n  tol: " << num(c.tol) << "\n  step: " << num(c.step) << "\n";
  if (c.seed) os << "seed: " << *c.seed << "\n";
  os << "output:\n  dir: " << quoted(c.output_dir) << "\n";
  return os.str();
}

std::string scenario_digest(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.output_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : emit_scenario(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Lattice scenario_lattice(const ScenarioConfig& c) {
  if (c.system == "star") {
    std::array<double, 4> j{};
    std::array<double, 5> v{};
    std::copy_n(c.couplings.begin(), 4, j.begin());
    std::copy_n(c.potentials.begin(), 5, v.begin());
    return {star_graph(), build_star(j, v)};
  }
  if (c.system == "seven") {
    std::array<double, 6> j{};
    std::array<double, 7> v{};
    std::copy_n(c.couplings.begin(), 6, j.begin());
    std::copy_n(c.potentials.begin(), 7, v.begin());
    return {seven_graph(), build_seven(j, v)};
  }
  return build_dll(c.cells_x, c.cells_y, c.couplings.at(0), c.potentials.at(0));
}

StateVector resolve_state(const ScenarioConfig& c, const StateSpec& spec, std::size_t dimension) {
  if (!spec.name.empty()) {
    static const std::map<std::string, StarState> names = {{"initial", StarState::initial},
                                                           {"final", StarState::final},
                                                           {"left", StarState::left},
                                                           {"right", StarState::right},
                                                           {"center", StarState::center}};
    const auto it = names.find(spec.name);
    if (it == names.end()) throw Error(ErrorCode::config, "unknown state '" + spec.name + "'");
    if (c.system == "star") return star_state(it->second);
    if (c.system == "seven") return seven_state(it->second);
    throw Error(ErrorCode::config, "named states exist only for the star and seven-site systems");
  }
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < spec.sites.size(); ++i) {
    if (spec.sites[i] >= dimension) throw Error(ErrorCode::config, "state site outside the system");
    amps(static_cast<Eigen::Index>(spec.sites[i])) += spec.amplitudes.at(i);
  }
  if (amps.norm() == 0.0) throw Error(ErrorCode::config, "state amplitudes are all zero");
  return StateVector::normalized(std::move(amps));
}

CrabParams resolve_coefficients(const ScenarioConfig& c, AnsatzKind kind) {
  CrabParams p = reference_params(kind);
  if (c.coefficients) {
    p.x = c.coefficients->x;
    p.xp = c.coefficients->xp;
    p.omega = c.coefficients->omega;
  }
  try {
    check_params(kind, p);
  } catch (const Error& e) {
    throw Error(ErrorCode::config, std::string("action.coefficients: ") + e.what());
  }
  return p;
}

}  // namespace clsnet
