#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "clsnet/core.hpp"
#include "clsnet/lattice.hpp"

namespace clsnet {

/// |<phi|psi>|^2; throws on dimension mismatch.
double fidelity(const StateVector& psi, const StateVector& phi);

/// psi(t) = exp(-iHt) psi0 by spectral decomposition.
StateVector evolve_static(const Matrix& h, const StateVector& psi0, double t);

using HamiltonianFn = std::function<Matrix(double)>;

struct EvolveOptions {
  /// Accepted deviation between the n-step and 2n-step runs, per unit time.
  double tol = 1e-12;
  /// Step used for the first attempt; halved until the runs agree.
  double initial_step = 2.0 * pi / 4096.0;
  std::size_t max_steps = std::size_t{1} << 20;
};

/// Solves i dpsi/dt = H(t) psi on [t0, t1] with a fourth-order commutator-free
/// exponential integrator. The step is fixed per attempt and halved until two
/// consecutive resolutions agree to tol * (t1 - t0); the finer result is
/// returned. Throws step_underflow once max_steps would be exceeded.
StateVector evolve_timedep(const TimedHamiltonian& h, const StateVector& psi0, double t0, double t1,
                           const EvolveOptions& options = {});
StateVector evolve_timedep(const HamiltonianFn& h, const StateVector& psi0, double t0, double t1,
                           const EvolveOptions& options = {});

/// The step count evolve_timedep settles on for [t0, t1]; the converged
/// state goes to *result when it is non-null.
std::size_t converged_step_count(const HamiltonianFn& h, const StateVector& psi0, double t0, double t1,
                                 const EvolveOptions& options = {}, CVector* result = nullptr);

/// Same scheme with a fixed number of steps and no convergence check.
StateVector propagate_fixed(const HamiltonianFn& h, const StateVector& psi0, double t0, double t1,
                            std::size_t steps);

/// Largest |norm - 1| produced by any propagator call since the last reset.
double observed_norm_drift();
void reset_norm_drift();

/// While alive, every propagator uses exp(+iHt) instead of exp(-iHt). Exists
/// so the verification suite can prove it notices a broken propagator.
class PropagatorSignFault {
 public:
  PropagatorSignFault();
  ~PropagatorSignFault();
  PropagatorSignFault(const PropagatorSignFault&) = delete;
  PropagatorSignFault& operator=(const PropagatorSignFault&) = delete;
};

struct PhaseFlip {
  Site site = 0;
};
struct HoppingFlip {
  Entry entry;
};
/// Replaces the running Hamiltonian; its pulses see time measured from the event.
struct Retune {
  TimedHamiltonian hamiltonian;
};

using ScheduleAction = std::variant<PhaseFlip, HoppingFlip, Retune>;

struct ScheduleEvent {
  double time = 0.0;
  ScheduleAction action;
};

std::string event_type(const ScheduleAction& action);

/// Instantaneous events on a fixed horizon; the state evolves freely under
/// the current Hamiltonian between them.
struct ProtocolSchedule {
  std::string name;
  TimedHamiltonian hamiltonian;
  std::vector<ScheduleEvent> events;  // non-decreasing times in [0, duration]
  double duration = 0.0;
  StateVector initial;
  StateVector target;

  /// Throws schedule_conflict when events at one instant touch the same
  /// target, invalid_argument/out_of_range for malformed events.
  void validate() const;
};

struct ScheduleSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  TimedHamiltonian hamiltonian;
  double origin = 0.0;  // pulses are evaluated at t - origin
};

struct FlattenedSchedule {
  std::vector<ScheduleSegment> segments;  // contiguous, positive length
  std::vector<std::pair<double, Site>> phase_flips;
};

FlattenedSchedule flatten(const ProtocolSchedule& s);

/// Schedule whose run from conj(psi(T)) ends at conj(psi0): events mirrored
/// to T - t, each segment's Hamiltonian time-reversed. Initial and target swap.
ProtocolSchedule reversed(const ProtocolSchedule& s);

struct TrajectoryEvent {
  double time = 0.0;
  std::string type;
  std::string target;
};

struct Trajectory {
  std::vector<double> times;  // strictly increasing
  std::vector<StateVector> states;
  std::vector<TrajectoryEvent> events;

  const StateVector& final_state() const { return states.back(); }
  double max_norm_drift() const;
};

struct RunOptions {
  EvolveOptions evolve;
  /// Uniform sampling interval; 0 samples only at event instants and the end.
  /// Time-dependent segments are then run at the fixed step that converges on
  /// the whole segment.
  double sample_dt = 0.0;
};

/// States are recorded after the events of their instant have been applied.
Trajectory run_schedule(const ProtocolSchedule& s, const StateVector& psi0, const RunOptions& options = {});

}  // namespace clsnet
