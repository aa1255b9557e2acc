#include "clsnet/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "clsnet/crab.hpp"
#include "clsnet/protocols.hpp"
#include "clsnet/routing.hpp"
#include "clsnet/spectral.hpp"

namespace clsnet {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string write_file(const ScenarioConfig& c, const std::string& name, const std::string& content) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  const fs::path path = fs::path(c.output_dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::config, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::config, "cannot write " + path.string());
  return path.string();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json provenance(const ScenarioConfig& c) {
  json j;
  j["digest"] = scenario_digest(c);
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

json summary(const ScenarioConfig& c, double fidelity, double norm_drift, double T, json parameters) {
  json j = provenance(c);
  j["fidelity"] = fidelity;
  j["infidelity"] = std::max(0.0, 1.0 - fidelity);
  j["norm_drift"] = norm_drift;
  j["T"] = T;
  j["parameters"] = std::move(parameters);
  return j;
}

EvolveOptions evolve_options(const ScenarioConfig& c) {
  EvolveOptions o;
  o.tol = c.tol;
  o.initial_step = c.step;
  return o;
}

json real_list(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json params_json(const CrabParams& p) {
  return {{"x", p.x}, {"xp", p.xp}, {"omega", p.omega}, {"floor", p.floor}, {"horizon", p.horizon}};
}

double uniform_coupling(const ScenarioConfig& c) {
  for (double j : c.couplings) {
    if (j != c.couplings.front()) {
      throw Error(ErrorCode::config, "protocol '" + c.protocol + "' needs uniform couplings on the star");
    }
  }
  return c.couplings.front();
}

void require_action(const ScenarioConfig& c, const char* action) {
  if (c.action != action) {
    throw Error(ErrorCode::config, std::string("command '") + action + "' given a config whose action is '" +
                                       c.action + "'");
  }
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "t";
  const std::size_t n = tr.states.empty() ? 0 : tr.states.front().dimension();
  for (std::size_t i = 0; i < n; ++i) out += ",re_" + std::to_string(i) + ",im_" + std::to_string(i);
  out += "\n";
  std::size_t next_event = 0;
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    while (next_event < tr.events.size() && tr.events[next_event].time <= tr.times[s]) {
      const auto& e = tr.events[next_event++];
      out += "# event " + e.type + " t=" + format_real(e.time) + "\n";
    }
    out += format_real(tr.times[s]);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex a = tr.states[s][i];
      out += "," + format_real(a.real()) + "," + format_real(a.imag());
    }
    out += "\n";
  }
  return out;
}

CommandResult cmd_spectrum(const ScenarioConfig& c) {
  require_action(c, "spectrum");
  const Lattice lattice = scenario_lattice(c);
  const Matrix& h = lattice.hamiltonian.base();
  const Spectrum sp = spectrum(h);

  json report = provenance(c);
  report["system"] = c.system;
  report["eigenvalues"] = real_list(sp.eigenvalues);
  json cls = json::array();
  for (const auto& state : find_cls(h, c.max_support)) {
    json amps = json::array();
    for (Site s : state.support) amps.push_back(state.vector[s].real());
    cls.push_back({{"energy", state.energy}, {"support", state.support}, {"amplitudes", amps}});
  }
  report["cls"] = cls;

  std::optional<PartitionBlocks> blocks;
  if (c.system == "star") {
    if (commutes_with_permutation(h, star_cycle())) {
      blocks = equitable_blocks_star(h);
    } else if (const Permutation swaps{1, 0, 2, 4, 3}; commutes_with_permutation(h, swaps)) {
      blocks = equitable_blocks(h, swaps);
    }
  } else if (c.system == "seven") {
    try {
      blocks = nonequitable_blocks_seven(h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::symmetry_violated && e.code() != ErrorCode::invalid_argument) throw;
    }
  }
  if (blocks) {
    json b = json::array();
    for (std::size_t k = 0; k < blocks->blocks.size(); ++k) {
      Vector ev = spectrum(blocks->blocks[k]).eigenvalues;
      b.push_back({{"name", blocks->names[k]}, {"size", blocks->blocks[k].rows()}, {"eigenvalues", real_list(ev)}});
    }
    report["blocks"] = {{"xi", blocks->xi}, {"sectors", b}};
  } else {
    report["blocks"] = nullptr;
  }

  CommandResult result;
  result.report = dump(report);
  result.files.push_back(write_file(c, "spectrum.json", result.report));
  return result;
}

CommandResult cmd_simulate(const ScenarioConfig& c) {
  require_action(c, "simulate");
  ProtocolSchedule schedule;
  json params;
  if (c.protocol == "free") {
    const Lattice lattice = scenario_lattice(c);
    TimedHamiltonian h = lattice.hamiltonian;
    for (const auto& p : c.pulses) h = h.with_pulse(p.entry, p.pulse);
    schedule.name = "free";
    schedule.hamiltonian = h;
    schedule.duration = c.duration;
    for (const auto& e : c.events) {
      if (e.type == "phase-flip") {
        schedule.events.push_back({e.time, PhaseFlip{e.site}});
      } else {
        schedule.events.push_back({e.time, HoppingFlip{e.entry}});
      }
    }
    schedule.initial = resolve_state(c, c.initial, h.dimension());
    schedule.target = resolve_state(c, c.target, h.dimension());
    params = {{"pulses", c.pulses.size()}, {"events", c.events.size()}};
  } else if (c.protocol == "crab") {
    const AnsatzKind kind = ansatz_kind_from_string(c.problem);
    const CrabProblem problem = crab_problem(kind);
    const CrabParams p = resolve_coefficients(c, kind);
    schedule.name = problem.name;
    schedule.hamiltonian = bind(problem, p);
    schedule.duration = problem.horizon;
    schedule.initial = problem.initial;
    schedule.target = problem.target;
    params = params_json(p);
    params["problem"] = c.problem;
  } else {
    const ProtocolVariant variant = protocol_variant_from_string(c.protocol);
    if (c.system == "seven") {
      // J1 sets the scale; J3 = J4 = sqrt3 J is implied by the protocol.
      const auto p = solve_seven_transfer_params(c.k, c.couplings.front(), c.potentials.front());
      schedule = build_schedule(GraphKind::seven, variant, p);
      params = {{"J", p.J}, {"v", p.v}, {"k", p.k}, {"T", p.T}};
    } else if (variant == ProtocolVariant::phase_flip_transfer || variant == ProtocolVariant::hopping_flip_transfer) {
      const auto p = solve_transfer_params(c.k1, c.k2, uniform_coupling(c));
      FlipOptions flips{c.first_site, c.second_site, c.first_coupling, c.second_coupling};
      schedule = build_schedule(GraphKind::star, variant, p, flips);
      params = {{"J", p.J}, {"v", p.v}, {"k1", p.k1}, {"k2", p.k2}, {"T", p.T}};
    } else {
      const double jp = c.generation_coupling.value_or(3.0 * std::sqrt(2.0) * uniform_coupling(c));
      const auto p = solve_generation_params(c.branch, c.k1p, c.k2p, jp);
      schedule = build_schedule(GraphKind::star, variant, p);
      params = {{"Jp", p.Jp}, {"v", p.v}, {"branch", p.branch}, {"k1p", p.k1p}, {"k2p", p.k2p}, {"T", p.T}};
    }
    params["protocol"] = c.protocol;
  }

  RunOptions run;
  run.evolve = evolve_options(c);
  run.sample_dt = c.sample_dt;
  const Trajectory tr = run_schedule(schedule, schedule.initial, run);
  const double f = fidelity(tr.final_state(), schedule.target);
  params["step"] = c.step;

  CommandResult result;
  result.files.push_back(write_file(c, "trajectory.csv", trajectory_csv(tr)));
  result.report = dump(summary(c, f, tr.max_norm_drift(), schedule.duration, params));
  result.files.push_back(write_file(c, "summary.json", result.report));
  return result;
}

CommandResult cmd_optimize(const ScenarioConfig& c) {
  require_action(c, "optimize");
  const AnsatzKind kind = ansatz_kind_from_string(c.problem);
  const CrabProblem problem = crab_problem(kind);

  OptimizeOptions opts;
  opts.restarts = c.restarts;
  opts.seed = c.seed.value_or(0);
  opts.omega_range = c.omega_range;
  opts.amplitude_range = c.amplitude_range;
  opts.nelder_mead.max_evals = c.max_evals;
  opts.nelder_mead.spread_tol = c.spread_tol;
  opts.optimize_omega = c.optimize_omega;
  opts.objective_steps = c.objective_steps;
  opts.verify_tol = c.tol;
  opts.workers = c.workers;

  reset_norm_drift();
  OptResult r;
  if (c.mode == "search") {
    if (!c.seed) throw Error(ErrorCode::config, "optimize mode 'search' needs a seed (config 'seed' or --seed)");
    r = optimize_crab(problem, opts);
  } else if (c.mode == "refine") {
    r = refine_crab(problem, resolve_coefficients(c, kind), opts);
  } else {
    r.best_params = resolve_coefficients(c, kind);
    r.infidelity = infidelity_adaptive(problem, r.best_params, evolve_options(c));
    r.search_infidelity = r.infidelity;
    r.evaluations = 1;
  }
  const double drift = observed_norm_drift();

  json report = provenance(c);
  report["problem"] = c.problem;
  report["mode"] = c.mode;
  report["infidelity"] = r.infidelity;
  report["search_infidelity"] = r.search_infidelity;
  report["evaluations"] = r.evaluations;
  report["restarts_used"] = r.restarts_used;
  report["best_restart"] = r.best_restart;
  report["best_params"] = params_json(r.best_params);
  json restarts = json::array();
  for (const auto& rec : r.restarts) {
    restarts.push_back({{"index", rec.index},
                        {"seed", rec.seed},
                        {"omega", rec.omega},
                        {"infidelity", rec.infidelity},
                        {"evaluations", rec.evaluations}});
  }
  report["restarts"] = restarts;

  // Best pulses on a uniform grid, as seen by the bound Hamiltonian.
  const TimedHamiltonian bound = bind(problem, r.best_params);
  std::string table = "t";
  for (const Entry& e : problem.channels) table += ",J_" + std::to_string(e.row) + "_" + std::to_string(e.col);
  table += "\n";
  constexpr std::size_t samples = 1000;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = problem.horizon * static_cast<double>(i) / static_cast<double>(samples);
    table += format_real(t);
    for (const Entry& e : problem.channels) table += "," + format_real(bound.value(e, t));
    table += "\n";
  }

  CommandResult result;
  result.report = dump(report);
  result.files.push_back(write_file(c, "optimize.json", result.report));
  result.files.push_back(write_file(c, "pulses.csv", table));
  json params = params_json(r.best_params);
  params["problem"] = c.problem;
  params["mode"] = c.mode;
  result.files.push_back(
      write_file(c, "summary.json", dump(summary(c, 1.0 - r.infidelity, drift, problem.horizon, params))));
  return result;
}

CommandResult cmd_route(const ScenarioConfig& c) {
  require_action(c, "route");
  const Lattice lattice = scenario_lattice(c);
  std::vector<RoutePlan> plans;
  for (const auto& rt : c.routes) plans.push_back(plan_route(lattice, rt.from, rt.to));
  RouteTiming timing;
  timing.ramp = c.ramp;
  timing.stagger = c.stagger;
  timing.k2 = c.k2;
  timing.protocol = c.jump_protocol == "hopping-flip" ? JumpProtocol::hopping_flip : JumpProtocol::phase_flip;
  const Timeline tl = schedule_multi(lattice, plans, timing);
  tl.verify();
  const RouteReport rep = simulate_route(lattice, tl, evolve_options(c));

  json report = provenance(c);
  json routes = json::array();
  double worst = 1.0;
  for (std::size_t r = 0; r < tl.routes.size(); ++r) {
    json jumps = json::array();
    for (const auto& j : rep.jumps) {
      if (j.route != r) continue;
      const Jump& jp = tl.routes[r].jumps[j.jump];
      jumps.push_back({{"hub", j.center},
                       {"from", {jp.from.first, jp.from.second}},
                       {"to", {jp.to.first, jp.to.second}},
                       {"start", j.start},
                       {"end", j.end},
                       {"fidelity", j.fidelity}});
    }
    const auto& plan = tl.routes[r];
    routes.push_back({{"source", {plan.source.first, plan.source.second}},
                      {"destination", {plan.destination.first, plan.destination.second}},
                      {"start", tl.starts[r]},
                      {"wait", tl.waits[r]},
                      {"fidelity", rep.fidelities[r]},
                      {"jumps", jumps}});
    worst = std::min(worst, rep.fidelities[r]);
  }
  report["routes"] = routes;
  report["makespan"] = tl.makespan();
  report["jump_duration"] = timing.jump_duration(tl.coupling);
  report["norm_drift"] = rep.norm_drift;

  json params = {{"ramp", c.ramp}, {"stagger", c.stagger}, {"protocol", c.jump_protocol},
                 {"k2", c.k2}, {"coupling", tl.coupling}, {"routes", c.routes.size()}};
  CommandResult result;
  result.files.push_back(write_file(c, "route.json", dump(report)));
  result.report = dump(summary(c, worst, rep.norm_drift, tl.makespan(), params));
  result.files.push_back(write_file(c, "summary.json", result.report));
  return result;
}

CommandResult run_command(const std::string& command, const ScenarioConfig& config) {
  if (command == "spectrum") return cmd_spectrum(config);
  if (command == "simulate") return cmd_simulate(config);
  if (command == "optimize") return cmd_optimize(config);
  if (command == "route") return cmd_route(config);
  throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
}

}  // namespace clsnet
