#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clsnet/crab.hpp"
#include "clsnet/lattice.hpp"
#include "clsnet/protocols.hpp"

namespace clsnet {

/// Named star/seven state ("initial", "final", "left", "right", "center") or
/// explicit real amplitudes on listed sites (normalized when used).
struct StateSpec {
  std::string name;
  std::vector<Site> sites;
  std::vector<double> amplitudes;
  friend bool operator==(const StateSpec&, const StateSpec&) = default;
};

struct PulseSpec {
  Entry entry;
  Pulse pulse;
  friend bool operator==(const PulseSpec&, const PulseSpec&) = default;
};

/// "phase-flip" uses `site`, "hopping-flip" uses `entry`.
struct EventSpec {
  double time = 0.0;
  std::string type;
  Site site = 0;
  Entry entry;
  friend bool operator==(const EventSpec&, const EventSpec&) = default;
};

struct CoefficientSpec {
  std::vector<double> x;
  std::vector<double> xp;
  std::vector<double> omega;
  friend bool operator==(const CoefficientSpec&, const CoefficientSpec&) = default;
};

struct RouteSpec {
  Dimer from;
  Dimer to;
  friend bool operator==(const RouteSpec&, const RouteSpec&) = default;
};

/// One run of the driver. Only the keys of the selected action are read or
/// written; the others keep their defaults.
struct ScenarioConfig {
  // system / parameters
  std::string system = "star";  // star | seven | dll
  std::size_t cells_x = 1;
  std::size_t cells_y = 1;
  std::vector<double> couplings;
  std::vector<double> potentials;

  std::string action = "spectrum";  // spectrum | simulate | optimize | route

  // spectrum
  std::size_t max_support = 2;

  // simulate
  std::string protocol;  // protocol variant, "crab" or "free"
  int k1 = 1;
  int k2 = 0;
  int branch = 2;
  int k1p = 0;
  int k2p = 1;
  int k = 0;
  Site first_site = star::s2;
  Site second_site = star::s4;
  int first_coupling = 1;
  int second_coupling = 3;
  std::optional<double> generation_coupling;
  double duration = 0.0;
  StateSpec initial;
  StateSpec target;
  std::vector<EventSpec> events;
  std::vector<PulseSpec> pulses;
  double sample_dt = 0.0;

  // simulate (crab) / optimize
  std::string problem;
  std::optional<CoefficientSpec> coefficients;
  std::string mode = "search";  // evaluate | refine | search
  std::size_t restarts = 32;
  std::pair<double, double> omega_range{0.4, 2.6};
  std::pair<double, double> amplitude_range{0.0, 3.0};
  std::size_t max_evals = 20000;
  double spread_tol = 1e-12;
  bool optimize_omega = false;
  std::size_t objective_steps = 0;
  std::size_t workers = 1;

  // route
  std::vector<RouteSpec> routes;
  double ramp = 1.0;
  std::string jump_protocol = "phase-flip";
  bool stagger = false;

  // integrator
  double tol = 1e-12;
  double step = 2.0 * pi / 4096.0;

  std::optional<std::uint64_t> seed;
  std::string output_dir = "out";

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses YAML text; every error is reported as "<source>:<line>:<column>: ...".
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "config");
ScenarioConfig load_scenario(const std::string& path);

/// Canonical YAML; parse_scenario(emit_scenario(c)) == c for parsed configs.
std::string emit_scenario(const ScenarioConfig& config);

/// FNV-1a 64 of the canonical YAML with output.dir blanked, 16 hex digits.
std::string scenario_digest(const ScenarioConfig& config);

/// Hamiltonian and graph of the configured system.
Lattice scenario_lattice(const ScenarioConfig& config);
StateVector resolve_state(const ScenarioConfig& config, const StateSpec& spec, std::size_t dimension);
CrabParams resolve_coefficients(const ScenarioConfig& config, AnsatzKind kind);

}  // namespace clsnet
