#include "clsnet/crab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

#include "clsnet/protocols.hpp"

namespace clsnet {

namespace {

const double sqrt2 = std::sqrt(2.0);

std::size_t amplitude_count(AnsatzKind kind) { return kind == AnsatzKind::star_creation ? 1 : channel_count(kind); }
std::size_t omega_count(AnsatzKind kind) { return kind == AnsatzKind::star_creation ? 2 : channel_count(kind); }

std::vector<double> pack(const CrabParams& p, bool with_omega) {
  std::vector<double> v = p.x;
  v.insert(v.end(), p.xp.begin(), p.xp.end());
  if (with_omega) v.insert(v.end(), p.omega.begin(), p.omega.end());
  return v;
}

CrabParams unpack(const std::vector<double>& v, const CrabParams& shape, bool with_omega) {
  CrabParams p = shape;
  const std::size_t a = shape.x.size();
  std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(a), p.x.begin());
  std::copy(v.begin() + static_cast<std::ptrdiff_t>(a), v.begin() + static_cast<std::ptrdiff_t>(2 * a), p.xp.begin());
  if (with_omega) {
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(2 * a), v.end(), p.omega.begin());
  }
  return p;
}

double uniform(std::mt19937_64& gen, std::pair<double, double> range) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return range.first + (range.second - range.first) * u;
}

std::uint64_t restart_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string format_point(const std::vector<double>& x) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ']';
  return os.str();
}

struct RunOutcome {
  CrabParams params;
  RestartRecord record;
};

RunOutcome run_from(const CrabProblem& problem, const CrabParams& start, const OptimizeOptions& options,
                    std::size_t steps) {
  const bool with_omega = options.optimize_omega;
  auto objective = [&](const std::vector<double>& v) {
    return infidelity_objective(problem, unpack(v, start, with_omega), steps);
  };
  const NelderMeadResult nm = nelder_mead(objective, pack(start, with_omega), options.nelder_mead);
  RunOutcome out;
  out.params = unpack(nm.x, start, with_omega);
  out.record.omega = out.params.omega;
  out.record.infidelity = nm.f;
  out.record.evaluations = nm.evaluations;
  return out;
}

OptResult finish(const CrabProblem& problem, std::vector<RunOutcome> runs, const OptimizeOptions& options) {
  OptResult result;
  result.seed = options.seed;
  result.restarts_used = runs.size();
  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    result.evaluations += runs[i].record.evaluations;
    const auto key = std::make_pair(runs[i].record.infidelity, runs[i].record.index);
    if (key < std::make_pair(runs[best].record.infidelity, runs[best].record.index)) best = i;
    result.restarts.push_back(runs[i].record);
  }
  result.best_restart = runs[best].record.index;
  result.best_params = runs[best].params;
  result.search_infidelity = runs[best].record.infidelity;
  EvolveOptions verify;
  verify.tol = options.verify_tol;
  result.infidelity = infidelity_adaptive(problem, result.best_params, verify);
  return result;
}

}  // namespace

std::string to_string(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::star_transfer: return "star-transfer";
    case AnsatzKind::seven_transfer: return "seven-transfer";
    case AnsatzKind::star_creation: return "star-creation";
    case AnsatzKind::seven_creation: return "seven-creation";
  }
  return "unknown";
}

AnsatzKind ansatz_kind_from_string(const std::string& name) {
  for (auto k : {AnsatzKind::star_transfer, AnsatzKind::seven_transfer, AnsatzKind::star_creation,
                 AnsatzKind::seven_creation}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::invalid_argument, "unknown control problem '" + name + "'");
}

std::size_t channel_count(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::star_transfer:
    case AnsatzKind::seven_transfer: return 4;
    case AnsatzKind::star_creation:
    case AnsatzKind::seven_creation: return 2;
  }
  return 0;
}

void check_params(AnsatzKind kind, const CrabParams& p) {
  if (p.x.size() != amplitude_count(kind) || p.xp.size() != amplitude_count(kind) ||
      p.omega.size() != omega_count(kind)) {
    throw Error(ErrorCode::invalid_argument,
                "ansatz " + to_string(kind) + " expects " + std::to_string(amplitude_count(kind)) + "/" +
                    std::to_string(amplitude_count(kind)) + "/" + std::to_string(omega_count(kind)) +
                    " coefficients (x/x'/omega)");
  }
  if (!(p.horizon >= 0.0) || !std::isfinite(p.horizon) || !std::isfinite(p.floor)) {
    throw Error(ErrorCode::invalid_argument, "ansatz horizon must be finite and non-negative");
  }
}

Pulse ansatz_pulse(AnsatzKind kind, std::size_t n, const CrabParams& p) {
  check_params(kind, p);
  if (n >= channel_count(kind)) throw Error(ErrorCode::out_of_range, "ansatz channel out of range");
  switch (kind) {
    case AnsatzKind::star_transfer: return Pulse::crab_star(p.floor, p.x[n], p.xp[n], p.omega[n]);
    case AnsatzKind::seven_transfer: return Pulse::crab_seven(p.floor, p.x[n], p.xp[n], p.omega[n]);
    case AnsatzKind::star_creation:
      return n == 0 ? Pulse::creation_star(p.floor, p.horizon, p.x[0], p.xp[0], p.omega[0], p.omega[1])
                    : Pulse::creation_star(p.floor, p.horizon, 0.0, 0.0, p.omega[0], p.omega[1]);
    case AnsatzKind::seven_creation: return Pulse::creation_seven(p.floor, p.x[n], p.xp[n], p.omega[n]);
  }
  throw Error(ErrorCode::invalid_argument, "unknown ansatz");
}

double eval_pulse(AnsatzKind kind, std::size_t n, double t, const CrabParams& p) {
  return ansatz_pulse(kind, n, p)(t);
}

CrabProblem star_transfer_problem() {
  CrabProblem pr;
  pr.name = to_string(AnsatzKind::star_transfer);
  pr.kind = AnsatzKind::star_transfer;
  pr.floor = 0.25;
  pr.horizon = 2.0 * pi;
  pr.hamiltonian = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5});
  for (int n = 1; n <= 4; ++n) pr.channels.push_back(star::coupling(n));
  pr.initial = star_state(StarState::initial);
  pr.target = star_state(StarState::final);
  pr.objective_steps = 128;
  return pr;
}

CrabProblem seven_transfer_problem() {
  const double j = 1.0 / (4.0 * sqrt2);
  CrabProblem pr;
  pr.name = to_string(AnsatzKind::seven_transfer);
  pr.kind = AnsatzKind::seven_transfer;
  pr.floor = j;
  pr.horizon = 4.0 * pi;
  pr.hamiltonian = build_seven({j, j, 3.0, 3.0, j, j}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  for (int n : {1, 2, 5, 6}) pr.channels.push_back(seven::coupling(n));
  pr.initial = seven_state(StarState::initial);
  pr.target = seven_state(StarState::final);
  pr.objective_steps = 512;
  return pr;
}

CrabProblem star_creation_problem() {
  CrabProblem pr;
  pr.name = to_string(AnsatzKind::star_creation);
  pr.kind = AnsatzKind::star_creation;
  pr.floor = 3.0 * sqrt2;
  pr.horizon = pi;
  pr.hamiltonian = build_star({0.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5, 0.5});
  pr.channels = {star::coupling(1), star::coupling(2)};
  pr.time_reversed = true;
  pr.initial = star_state(StarState::center);
  pr.target = star_state(StarState::initial);
  pr.objective_steps = 128;
  return pr;
}

CrabProblem seven_creation_problem() {
  const double j = 1.0 / (4.0 * sqrt2);
  CrabProblem pr;
  pr.name = to_string(AnsatzKind::seven_creation);
  pr.kind = AnsatzKind::seven_creation;
  pr.floor = j;
  pr.horizon = 2.0 * pi;
  pr.hamiltonian = build_seven({0.0, 0.0, 0.0, 0.0, j, j}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5})
                       .with_pulse(seven::coupling(3), Pulse::linear_ramp(0.0, 1.0, 0.0, 2.0 * pi));
  pr.channels = {seven::coupling(1), seven::coupling(2)};
  pr.initial = seven_state(StarState::center);
  pr.target = seven_state(StarState::initial);
  pr.objective_steps = 256;
  return pr;
}

CrabProblem crab_problem(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::star_transfer: return star_transfer_problem();
    case AnsatzKind::seven_transfer: return seven_transfer_problem();
    case AnsatzKind::star_creation: return star_creation_problem();
    case AnsatzKind::seven_creation: return seven_creation_problem();
  }
  throw Error(ErrorCode::invalid_argument, "unknown ansatz");
}

CrabParams reference_params(AnsatzKind kind) {
  CrabParams p;
  const CrabProblem pr = crab_problem(kind);
  p.floor = pr.floor;
  p.horizon = pr.horizon;
  switch (kind) {
    case AnsatzKind::star_transfer:
      p.x = {0.5850, 2.4015, 2.5033, 0.2199};
      p.xp = {2.9997, 0.5954, 0.4555, 2.8103};
      p.omega = {1.4452, 1.3069, 1.1680, 1.3510};
      break;
    case AnsatzKind::seven_transfer:
      p.x = {4.1435, 3.2435, 2.5509, 4.7169};
      p.xp = {2.2124, 3.3942, 3.3221, 1.9491};
      p.omega = {1.9171, 0.9476, 0.4496, 0.9671};
      break;
    case AnsatzKind::star_creation:
      p.x = {0.8292};
      p.xp = {1.5246};
      p.omega = {1.7638, 1.9434};
      break;
    case AnsatzKind::seven_creation:
      p.x = {6.9763, 4.1098};
      p.xp = {2.1072, 6.4490};
      p.omega = {1.7465, 0.7946};
      break;
  }
  return p;
}

TimedHamiltonian bind(const CrabProblem& problem, const CrabParams& p) {
  if (problem.channels.size() != channel_count(problem.kind)) {
    throw Error(ErrorCode::invalid_argument, "problem " + problem.name + " binds the wrong number of channels");
  }
  TimedHamiltonian h = problem.hamiltonian;
  for (std::size_t n = 0; n < problem.channels.size(); ++n) {
    Pulse pulse = ansatz_pulse(problem.kind, n, p);
    if (problem.time_reversed) pulse = pulse.time_reversed(p.horizon);
    h = h.with_pulse(problem.channels[n], pulse);
  }
  return h;
}

double infidelity_objective(const CrabProblem& problem, const CrabParams& p, std::size_t steps) {
  const TimedHamiltonian h = bind(problem, p);
  if (p.horizon == 0.0) return std::max(0.0, 1.0 - fidelity(problem.initial, problem.target));
  const StateVector psi = propagate_fixed([&h](double t) { return h.at(t); }, problem.initial, 0.0, p.horizon, steps);
  return std::max(0.0, 1.0 - fidelity(psi, problem.target));
}

double infidelity_adaptive(const CrabProblem& problem, const CrabParams& p, const EvolveOptions& options) {
  const TimedHamiltonian h = bind(problem, p);
  const StateVector psi = evolve_timedep(h, problem.initial, 0.0, p.horizon, options);
  return std::max(0.0, 1.0 - fidelity(psi, problem.target));
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "nelder_mead: empty parameter vector");
  if (options.max_evals < dim + 1) throw Error(ErrorCode::invalid_argument, "nelder_mead: max_evals < dim + 1");
  for (double v : x0) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "nelder_mead: non-finite start " + format_point(x0));
  }

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    const double value = f(x);
    ++result.evaluations;
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::non_finite, "nelder_mead: objective returned " + std::to_string(value) + " at " +
                                             format_point(x));
    }
    return value;
  };

  std::vector<std::vector<double>> simplex(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) {
    simplex[i + 1][i] = x0[i] != 0.0 ? x0[i] * 1.05 : 0.05;
  }
  std::vector<double> fv(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double coeff) {
    std::vector<double> out(dim);
    for (std::size_t k = 0; k < dim; ++k) out[k] = c[k] + coeff * (w[k] - c[k]);
    return out;
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (std::size_t i : order) {
        s2.push_back(std::move(simplex[i]));
        f2.push_back(fv[i]);
      }
      simplex = std::move(s2);
      fv = std::move(f2);
    }
    if (fv[dim] - fv[0] < options.spread_tol) {
      result.converged = true;
      break;
    }
    if (result.evaluations + 2 > options.max_evals) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / static_cast<double>(dim);
    }
    const auto& worst = simplex[dim];
    std::vector<double> xr = point(centroid, worst, -1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      std::vector<double> xe = point(centroid, worst, -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[dim] = std::move(xe);
        fv[dim] = fe;
      } else {
        simplex[dim] = std::move(xr);
        fv[dim] = fr;
      }
      continue;
    }
    if (fr < fv[dim - 1]) {
      simplex[dim] = std::move(xr);
      fv[dim] = fr;
      continue;
    }
    const bool outside = fr < fv[dim];
    std::vector<double> xc = outside ? point(centroid, xr, 0.5) : point(centroid, worst, 0.5);
    const double fc = eval(xc);
    if (outside ? fc <= fr : fc < fv[dim]) {
      simplex[dim] = std::move(xc);
      fv[dim] = fc;
      continue;
    }
    if (result.evaluations + dim > options.max_evals) break;
    for (std::size_t i = 1; i <= dim; ++i) {
      simplex[i] = point(simplex[0], simplex[i], 0.5);
      fv[i] = eval(simplex[i]);
    }
  }
  result.x = simplex[0];
  result.f = fv[0];
  return result;
}

OptResult optimize_crab(const CrabProblem& problem, const OptimizeOptions& options) {
  if (options.restarts < 1) throw Error(ErrorCode::invalid_argument, "optimize_crab: at least one restart");
  if (!(options.omega_range.first < options.omega_range.second)) {
    throw Error(ErrorCode::invalid_argument, "optimize_crab: empty frequency range");
  }
  const std::size_t steps = options.objective_steps ? options.objective_steps : problem.objective_steps;

  auto restart = [&](std::size_t index) {
    const std::uint64_t sub_seed = restart_seed(options.seed, index);
    std::mt19937_64 gen(sub_seed);
    CrabParams start;
    start.floor = problem.floor;
    start.horizon = problem.horizon;
    for (std::size_t k = 0; k < omega_count(problem.kind); ++k) start.omega.push_back(uniform(gen, options.omega_range));
    for (std::size_t k = 0; k < amplitude_count(problem.kind); ++k) start.x.push_back(uniform(gen, options.amplitude_range));
    for (std::size_t k = 0; k < amplitude_count(problem.kind); ++k) start.xp.push_back(uniform(gen, options.amplitude_range));
    RunOutcome out = run_from(problem, start, options, steps);
    out.record.index = index;
    out.record.seed = sub_seed;
    out.record.omega = start.omega;
    return out;
  };

  std::vector<RunOutcome> runs(options.restarts);
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, options.restarts));
  if (workers == 1) {
    for (std::size_t i = 0; i < options.restarts; ++i) runs[i] = restart(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < options.restarts; i += workers) runs[i] = restart(i);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  return finish(problem, std::move(runs), options);
}

OptResult refine_crab(const CrabProblem& problem, const CrabParams& start, const OptimizeOptions& options) {
  check_params(problem.kind, start);
  const std::size_t steps = options.objective_steps ? options.objective_steps : problem.objective_steps;
  RunOutcome out = run_from(problem, start, options, steps);
  out.record.index = 0;
  out.record.seed = options.seed;
  std::vector<RunOutcome> runs;
  runs.push_back(std::move(out));
  return finish(problem, std::move(runs), options);
}

double min_pulse_value(AnsatzKind kind, std::size_t channel, const CrabParams& p, std::size_t samples) {
  const Pulse pulse = ansatz_pulse(kind, channel, p);
  if (samples < 2) throw Error(ErrorCode::invalid_argument, "min_pulse_value: need at least two samples");
  double lowest = pulse(0.0);
  for (std::size_t i = 1; i < samples; ++i) {
    lowest = std::min(lowest, pulse(p.horizon * static_cast<double>(i) / static_cast<double>(samples - 1)));
  }
  return lowest;
}

}  // namespace clsnet
