#pragma once

#include <limits>
#include <vector>

#include "clsnet/evolve.hpp"
#include "clsnet/lattice.hpp"
#include "clsnet/protocols.hpp"

namespace clsnet {

/// A hub with two of its dimers, seen as a five-site star.
struct StarView {
  Site center = 0;
  Dimer dimer_in;
  Dimer dimer_out;
  /// Couplings with exactly one end on the star, ascending.
  std::vector<Entry> boundary_entries;

  /// Lattice sites in star matrix order (1, 2, c, 3, 4).
  std::array<Site, 5> sites() const;
  /// Star coupling J_n (n = 1..4) as a lattice entry.
  Entry internal_entry(int n) const;
};

/// `dimer_in` and `dimer_out` must both touch `center`.
StarView extract_star(const Lattice& lattice, Site center, Dimer dimer_in, Dimer dimer_out);
/// Uses the first two dimers of `center` in ascending order.
StarView extract_star(const Lattice& lattice, Site center);

/// Dimers attached to a hub, ascending.
std::vector<Dimer> hub_dimers(const SiteGraph& graph, Site hub);

/// Boundary entries of a star grouped by the dimer they touch; each pair must
/// ramp identically so that the dimer's local symmetry survives the ramp.
std::vector<std::pair<Entry, Entry>> boundary_pairs(const SiteGraph& graph, const StarView& star);

enum class RampDirection { down, up };

/// Multiplicative factor profile on a set of entries over [t_start, t_start + duration].
struct RampSegment {
  double t_start = 0.0;
  double duration = 0.0;
  RampDirection direction = RampDirection::down;
  std::vector<Entry> entries;
  std::vector<std::pair<Entry, Entry>> paired;

  /// 1 -> 0 (down) or 0 -> 1 (up), linear, held outside the interval.
  double factor(double t) const;
  /// Value of `e` at time t given its stored base value.
  double value(Entry e, double base, double t) const;
  /// Applies the ramp to every entry of `h` (values scaled from the base).
  TimedHamiltonian apply(const TimedHamiltonian& h) const;
};

/// Throws invalid_argument when a pair references an entry that is not
/// ramped, or when paired entries have different base values in `h`.
RampSegment build_ramp(const TimedHamiltonian& h, std::vector<Entry> entries, RampDirection direction,
                       double duration, std::vector<std::pair<Entry, Entry>> paired, double t_start = 0.0);

struct Jump {
  StarView star;
  Dimer from;
  Dimer to;
};

struct RoutePlan {
  Dimer source;
  Dimer destination;
  std::vector<Jump> jumps;
};

/// Shortest chain of dimer jumps (dimers sharing a hub are adjacent). Ties
/// are broken by the smallest (hub, next dimer) at every step. Throws
/// no_route when the destination is unreachable.
RoutePlan plan_route(const Lattice& lattice, Dimer source, Dimer destination);

enum class JumpProtocol { phase_flip, hopping_flip };

struct RouteTiming {
  double ramp = 1.0;  // delta t of each ramp
  JumpProtocol protocol = JumpProtocol::phase_flip;
  int k2 = 0;  // transfer time pi(1 + 2 k2)/(2J)
  /// Hub couplings to the other dimers ramp down before (and up after) the
  /// paired dimer couplings instead of alongside them.
  bool stagger = false;
  /// Transfer time for the lattice coupling J.
  double transfer_time(double coupling) const;
  /// Time from the start of a jump until the star is isolated.
  double lead() const { return stagger ? 2.0 * ramp : ramp; }
  double jump_duration(double coupling) const { return 2.0 * lead() + transfer_time(coupling); }
};

inline constexpr double forever = std::numeric_limits<double>::infinity();

/// A set of sites reserved by one route over [start, end).
struct Reservation {
  std::size_t route = 0;
  std::size_t jump = 0;  // jump index, or npos for a resting dimer
  double start = 0.0;
  double end = 0.0;
  std::vector<Site> sites;
  Site center = 0;  // star center for jumps

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

struct Timeline {
  std::vector<RoutePlan> routes;
  std::vector<double> starts;  // start of each route's first jump
  std::vector<double> waits;   // delay inserted before each route
  std::vector<Reservation> reservations;
  RouteTiming timing;
  double coupling = 0.0;

  double jump_start(std::size_t route, std::size_t jump) const;
  double makespan() const;
  /// Throws schedule_conflict when two routes hold a common site at once.
  void verify() const;
};

/// Greedy earliest start in request order. A route's CLS occupies its source
/// dimer until its first jump, the star of each jump while it runs and its
/// destination afterwards; routes not yet placed hold their sources for all
/// time. Throws unschedulable when a route is blocked forever.
Timeline schedule_multi(const Lattice& lattice, const std::vector<RoutePlan>& routes, const RouteTiming& timing);

/// Dimer CLS (|a> - |b>)/sqrt2 as a lattice state.
StateVector dimer_state(std::size_t dimension, Dimer d);

struct JumpReport {
  std::size_t route = 0;
  std::size_t jump = 0;
  Site center = 0;
  double start = 0.0;
  double end = 0.0;
  double fidelity = 0.0;  // to the CLS on the jump's output dimer
};

struct RouteReport {
  std::vector<StateVector> final_states;  // one per route
  std::vector<double> fidelities;         // per route, to the destination CLS
  std::vector<JumpReport> jumps;
  double norm_drift = 0.0;
  double duration = 0.0;
};

/// Runs every route of the timeline on the full lattice: for each jump the
/// star's boundary couplings ramp down, the in-star transfer runs, and the
/// couplings ramp back up. Route components evolve under the same
/// Hamiltonian; each starts as its source CLS.
RouteReport simulate_route(const Lattice& lattice, const Timeline& timeline, const EvolveOptions& options = {});

/// Star schedule used for one jump (phase or hopping flips) for coupling J
/// and potential v.
ProtocolSchedule jump_schedule(const RouteTiming& timing, double coupling, double potential);

}  // namespace clsnet
