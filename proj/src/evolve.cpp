#include "clsnet/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

namespace clsnet {

namespace {

std::atomic<int> g_sign_faults{0};
std::atomic<double> g_norm_drift{0.0};

double propagator_sign() { return g_sign_faults.load() > 0 ? -1.0 : 1.0; }

void record_norm(const CVector& psi) {
  const double drift = std::abs(psi.norm() - 1.0);
  double seen = g_norm_drift.load();
  while (drift > seen && !g_norm_drift.compare_exchange_weak(seen, drift)) {
  }
}

void require_state(const StateVector& psi, Eigen::Index dim) {
  if (psi.amplitudes().size() != dim) {
    throw Error(ErrorCode::invalid_argument, "state dimension " + std::to_string(psi.dimension()) +
                                                 " does not match Hamiltonian dimension " + std::to_string(dim));
  }
}

void require_hamiltonian(const Matrix& h) {
  if (!h.allFinite()) throw Error(ErrorCode::non_finite, "Hamiltonian has non-finite entries");
  if (!is_symmetric(h)) throw Error(ErrorCode::not_hermitian, "Hamiltonian is not real symmetric");
}

// psi <- exp(-i tau m) psi for real symmetric m.
void apply_exponential(const Matrix& m, double tau, CVector& psi) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Matrix& v = es.eigenvectors();
  const Vector re = v.transpose() * psi.real();
  const Vector im = v.transpose() * psi.imag();
  const double sign = propagator_sign();
  CVector rotated(re.size());
  for (Eigen::Index k = 0; k < re.size(); ++k) {
    rotated(k) = std::polar(1.0, -sign * tau * es.eigenvalues()(k)) * Complex(re(k), im(k));
  }
  psi.real() = v * rotated.real();
  psi.imag() = v * rotated.imag();
}

CVector cf4(const HamiltonianFn& h, CVector psi, double t0, double t1, std::size_t steps) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  static const double a1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
  static const double a2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;
  const double step = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * step;
    const Matrix h1 = h(t + c1 * step);
    const Matrix h2 = h(t + c2 * step);
    if (!h1.allFinite() || !h2.allFinite()) {
      throw Error(ErrorCode::non_finite, "Hamiltonian is non-finite near t=" + std::to_string(t));
    }
    apply_exponential(a2 * h1 + a1 * h2, step, psi);
    apply_exponential(a1 * h1 + a2 * h2, step, psi);
  }
  return psi;
}

void check_interval(double t0, double t1) {
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw Error(ErrorCode::non_finite, "non-finite time interval");
  if (t1 < t0) throw Error(ErrorCode::invalid_argument, "evolution interval must satisfy t1 >= t0");
}

}  // namespace

double fidelity(const StateVector& psi, const StateVector& phi) {
  if (psi.dimension() != phi.dimension()) {
    throw Error(ErrorCode::invalid_argument, "fidelity: dimension mismatch");
  }
  return std::norm(phi.amplitudes().dot(psi.amplitudes()));
}

StateVector evolve_static(const Matrix& h, const StateVector& psi0, double t) {
  require_hamiltonian(h);
  require_state(psi0, h.rows());
  if (!std::isfinite(t)) throw Error(ErrorCode::non_finite, "evolve_static: non-finite time");
  CVector psi = psi0.amplitudes();
  if (t != 0.0) apply_exponential(h, t, psi);
  record_norm(psi);
  return StateVector(std::move(psi));
}

StateVector evolve_timedep(const TimedHamiltonian& h, const StateVector& psi0, double t0, double t1,
                           const EvolveOptions& options) {
  if (h.is_static()) {
    check_interval(t0, t1);
    return evolve_static(h.base(), psi0, t1 - t0);
  }
  return evolve_timedep([&h](double t) { return h.at(t); }, psi0, t0, t1, options);
}

std::size_t converged_step_count(const HamiltonianFn& h, const StateVector& psi0, double t0, double t1,
                                 const EvolveOptions& options, CVector* result) {
  check_interval(t0, t1);
  if (!(options.tol >= 1e-14 && options.tol <= 1e-6)) {
    throw Error(ErrorCode::invalid_argument, "integrator tolerance must lie in [1e-14, 1e-6]");
  }
  if (!(options.initial_step > 0.0)) throw Error(ErrorCode::invalid_argument, "initial step must be positive");
  const double duration = t1 - t0;
  if (duration == 0.0) {
    if (result) *result = psi0.amplitudes();
    return 1;
  }
  require_hamiltonian(h(t0));
  require_state(psi0, h(t0).rows());

  auto steps = static_cast<std::size_t>(std::ceil(duration / options.initial_step));
  steps = std::max<std::size_t>(steps, 1);
  if (steps > options.max_steps) {
    throw Error(ErrorCode::step_underflow, "evolve_timedep: initial step count exceeds max_steps");
  }
  CVector coarse = cf4(h, psi0.amplitudes(), t0, t1, steps);
  while (true) {
    if (2 * steps > options.max_steps) {
      throw Error(ErrorCode::step_underflow,
                  "evolve_timedep: no convergence to tol " + std::to_string(options.tol) + " within " +
                      std::to_string(options.max_steps) + " steps on [" + std::to_string(t0) + ", " +
                      std::to_string(t1) + "]");
    }
    steps *= 2;
    CVector fine = cf4(h, psi0.amplitudes(), t0, t1, steps);
    const double deviation = (fine - coarse).norm();
    if (deviation <= options.tol * duration) {
      record_norm(fine);
      if (result) *result = std::move(fine);
      return steps;
    }
    coarse = std::move(fine);
  }
}

StateVector evolve_timedep(const HamiltonianFn& h, const StateVector& psi0, double t0, double t1,
                           const EvolveOptions& options) {
  CVector out;
  converged_step_count(h, psi0, t0, t1, options, &out);
  return StateVector(std::move(out));
}

StateVector propagate_fixed(const HamiltonianFn& h, const StateVector& psi0, double t0, double t1,
                            std::size_t steps) {
  check_interval(t0, t1);
  if (steps == 0) throw Error(ErrorCode::invalid_argument, "propagate_fixed: zero steps");
  if (t1 == t0) return psi0;
  require_state(psi0, h(t0).rows());
  CVector psi = cf4(h, psi0.amplitudes(), t0, t1, steps);
  record_norm(psi);
  return StateVector(std::move(psi));
}

double observed_norm_drift() { return g_norm_drift.load(); }
void reset_norm_drift() { g_norm_drift.store(0.0); }

PropagatorSignFault::PropagatorSignFault() { ++g_sign_faults; }
PropagatorSignFault::~PropagatorSignFault() { --g_sign_faults; }

// ---------------------------------------------------------------------------

std::string event_type(const ScheduleAction& action) {
  switch (action.index()) {
    case 0: return "phase-flip";
    case 1: return "hopping-flip";
    default: return "retune";
  }
}

void ProtocolSchedule::validate() const {
  const std::size_t n = hamiltonian.dimension();
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::invalid_argument, "schedule duration must be finite and non-negative");
  }
  if (initial.dimension() != 0 && initial.dimension() != n) {
    throw Error(ErrorCode::invalid_argument, "schedule initial state has the wrong dimension");
  }
  if (target.dimension() != 0 && target.dimension() != n) {
    throw Error(ErrorCode::invalid_argument, "schedule target state has the wrong dimension");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!(e.time >= 0.0 && e.time <= duration)) {
      throw Error(ErrorCode::invalid_argument, "event at t=" + std::to_string(e.time) + " lies outside the schedule");
    }
    if (i > 0 && e.time < events[i - 1].time) {
      throw Error(ErrorCode::invalid_argument, "schedule events are not time-ordered");
    }
    if (const auto* p = std::get_if<PhaseFlip>(&e.action); p && p->site >= n) {
      throw Error(ErrorCode::out_of_range, "phase flip on site " + std::to_string(p->site) + " out of range");
    }
    if (const auto* f = std::get_if<HoppingFlip>(&e.action)) {
      if (f->entry.col >= n) throw Error(ErrorCode::out_of_range, "hopping flip entry out of range");
      if (f->entry.diagonal()) throw Error(ErrorCode::invalid_argument, "hopping flip on a diagonal entry");
    }
    if (const auto* r = std::get_if<Retune>(&e.action); r && r->hamiltonian.dimension() != n) {
      throw Error(ErrorCode::invalid_argument, "retune changes the Hamiltonian dimension");
    }
  }
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    while (j < events.size() && events[j].time == events[i].time) ++j;
    int retunes = 0;
    std::set<Entry> entries;
    std::set<Site> sites;
    for (std::size_t k = i; k < j; ++k) {
      const auto& a = events[k].action;
      bool clash = false;
      if (std::holds_alternative<Retune>(a)) clash = ++retunes > 1 || !entries.empty();
      if (const auto* f = std::get_if<HoppingFlip>(&a)) clash = retunes > 0 || !entries.insert(f->entry).second;
      if (const auto* p = std::get_if<PhaseFlip>(&a)) clash = !sites.insert(p->site).second;
      if (clash) {
        throw Error(ErrorCode::schedule_conflict,
                    "conflicting " + event_type(a) + " events at t=" + std::to_string(events[i].time));
      }
    }
    i = j;
  }
}

FlattenedSchedule flatten(const ProtocolSchedule& s) {
  s.validate();
  FlattenedSchedule out;
  TimedHamiltonian current = s.hamiltonian;
  double origin = 0.0;
  double t = 0.0;
  auto close = [&](double until) {
    if (until > t) out.segments.push_back({t, until, current, origin});
    t = std::max(t, until);
  };
  for (const auto& e : s.events) {
    close(e.time);
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, PhaseFlip>) {
            out.phase_flips.emplace_back(e.time, a.site);
          } else if constexpr (std::is_same_v<A, HoppingFlip>) {
            current = current.with_scaled(a.entry, -1.0);
          } else {
            current = a.hamiltonian;
            origin = e.time;
          }
        },
        e.action);
  }
  close(s.duration);
  return out;
}

ProtocolSchedule reversed(const ProtocolSchedule& s) {
  const FlattenedSchedule flat = flatten(s);
  const double total = s.duration;
  ProtocolSchedule out;
  out.name = s.name.empty() ? std::string("reversed") : s.name + "-reversed";
  out.duration = total;
  out.initial = s.target;
  out.target = s.initial;
  out.hamiltonian = flat.segments.empty() ? s.hamiltonian : flat.segments.back().hamiltonian;

  struct Item {
    double time;
    ScheduleAction action;
  };
  std::vector<Item> items;
  for (auto it = flat.segments.rbegin(); it != flat.segments.rend(); ++it) {
    items.push_back({total - it->t1, Retune{it->hamiltonian.time_reversed(it->t1 - it->origin)}});
  }
  for (auto it = flat.phase_flips.rbegin(); it != flat.phase_flips.rend(); ++it) {
    items.push_back({total - it->first, PhaseFlip{it->second}});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.time < b.time; });
  for (auto& item : items) out.events.push_back({item.time, std::move(item.action)});
  return out;
}

double Trajectory::max_norm_drift() const {
  double drift = 0.0;
  for (const auto& s : states) drift = std::max(drift, std::abs(s.norm() - 1.0));
  return drift;
}

Trajectory run_schedule(const ProtocolSchedule& s, const StateVector& psi0, const RunOptions& options) {
  const FlattenedSchedule flat = flatten(s);
  require_state(psi0, static_cast<Eigen::Index>(s.hamiltonian.dimension()));
  if (options.sample_dt < 0.0) throw Error(ErrorCode::invalid_argument, "sample_dt must be non-negative");

  Trajectory traj;
  for (const auto& e : s.events) {
    std::string target;
    if (const auto* p = std::get_if<PhaseFlip>(&e.action)) target = std::to_string(p->site);
    if (const auto* f = std::get_if<HoppingFlip>(&e.action)) target = to_string(f->entry);
    traj.events.push_back({e.time, event_type(e.action), target});
  }

  CVector psi = psi0.amplitudes();
  std::size_t next_flip = 0;
  auto apply_flips = [&](double until) {
    while (next_flip < flat.phase_flips.size() && flat.phase_flips[next_flip].first <= until) {
      psi(static_cast<Eigen::Index>(flat.phase_flips[next_flip].second)) *= -1.0;
      ++next_flip;
    }
  };
  auto record = [&](double t) {
    if (!traj.times.empty() && traj.times.back() == t) {
      traj.states.back() = StateVector(psi);
    } else {
      traj.times.push_back(t);
      traj.states.emplace_back(psi);
    }
  };

  apply_flips(0.0);
  record(0.0);
  for (const auto& seg : flat.segments) {
    std::vector<double> marks;
    if (options.sample_dt > 0.0) {
      const auto first = static_cast<long long>(std::floor(seg.t0 / options.sample_dt)) + 1;
      for (long long k = first; static_cast<double>(k) * options.sample_dt < seg.t1; ++k) {
        marks.push_back(static_cast<double>(k) * options.sample_dt);
      }
    }
    marks.push_back(seg.t1);
    const auto& h = seg.hamiltonian;
    const double origin = seg.origin;
    const HamiltonianFn hfn = [&h, origin](double tau) { return h.at(tau - origin); };
    // One fixed step per segment, chosen on the whole segment, so that
    // sampling does not change the accuracy target of each piece.
    double step = 0.0;
    if (!h.is_static() && marks.size() > 1) {
      step = (seg.t1 - seg.t0) / static_cast<double>(converged_step_count(hfn, StateVector(psi), seg.t0, seg.t1,
                                                                          options.evolve));
    }
    double t = seg.t0;
    for (double mark : marks) {
      StateVector current(psi);
      if (h.is_static()) {
        current = evolve_static(h.base(), current, mark - t);
      } else if (step > 0.0) {
        const auto n = static_cast<std::size_t>(std::ceil((mark - t) / step * (1.0 - 1e-12)));
        current = propagate_fixed(hfn, current, t, mark, std::max<std::size_t>(n, 1));
      } else {
        current = evolve_timedep(hfn, current, t, mark, options.evolve);
      }
      psi = current.amplitudes();
      t = mark;
      if (mark == seg.t1) apply_flips(mark);
      record(mark);
    }
  }
  apply_flips(s.duration);
  record(s.duration);
  return traj;
}

}  // namespace clsnet
