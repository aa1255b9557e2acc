#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clsnet/core.hpp"

namespace clsnet {

/// Scalar function of time attached to one Hamiltonian entry.
///
/// Every pulse is a closed-form profile plus a gain and an affine time map
/// t -> time_sign * t + time_shift, so that reversed or rescaled copies stay
/// exact (no resampling).
class Pulse {
 public:
  enum class Kind {
    constant,
    linear_ramp,
    crab_star,
    crab_seven,
    creation_star,
    creation_seven,
    custom_table,
  };

  static Pulse constant(double value);
  /// `from` at t_start, `to` at t_end, linear in between, held outside.
  static Pulse linear_ramp(double from, double to, double t_start, double t_end);
  /// floor * {1 + sin(t/2) [x sin(omega t) + xp cos(omega t)]^2}
  static Pulse crab_star(double floor, double x, double xp, double omega);
  /// floor * {1 + sin(t/4) [x sin(omega t) + xp cos(omega t)]^2}
  static Pulse crab_seven(double floor, double x, double xp, double omega);
  /// {1 + x sin(omega t) + xp sin(omega_p t)} * amplitude * (1 - t/horizon)
  static Pulse creation_star(double amplitude, double horizon, double x, double xp, double omega,
                             double omega_p);
  /// floor * {1 + sin(t/2) [x sin(omega t) + xp cos(omega t)]}
  static Pulse creation_seven(double floor, double x, double xp, double omega);
  /// Piecewise-linear interpolation through (times[i], values[i]); held outside.
  static Pulse table(std::vector<double> times, std::vector<double> values);

  /// Rebuilds a pulse from its serialized pieces; validates arity.
  static Pulse from_parts(Kind kind, std::vector<double> params, double gain, double time_sign,
                          double time_shift);

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double gain() const { return gain_; }
  double time_sign() const { return time_sign_; }
  double time_shift() const { return time_shift_; }

  Pulse scaled(double factor) const;
  /// p'(t) = p(horizon - t)
  Pulse time_reversed(double horizon) const;
  /// p'(t) = p(t - delay)
  Pulse delayed(double delay) const;

  friend bool operator==(const Pulse&, const Pulse&) = default;

 private:
  Pulse(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}
  double raw(double t) const;

  Kind kind_ = Kind::constant;
  std::vector<double> params_{0.0};
  double gain_ = 1.0;
  double time_sign_ = 1.0;
  double time_shift_ = 0.0;
};

std::string to_string(Pulse::Kind kind);
Pulse::Kind pulse_kind_from_string(const std::string& name);

/// Real symmetric site-graph Hamiltonian with optional time-dependent entries.
/// Values are immutable; every modifier returns a new Hamiltonian.
class TimedHamiltonian {
 public:
  TimedHamiltonian() = default;
  explicit TimedHamiltonian(Matrix base);

  std::size_t dimension() const { return static_cast<std::size_t>(base_.rows()); }
  const Matrix& base() const { return base_; }
  const std::map<Entry, Pulse>& pulses() const { return pulses_; }
  bool is_static() const { return pulses_.empty(); }

  double value(Entry e, double t) const;
  Matrix at(double t) const;

  TimedHamiltonian with_pulse(Entry e, Pulse p) const;
  /// Sets a static value; drops any pulse on that entry.
  TimedHamiltonian with_value(Entry e, double value) const;
  /// Multiplies the entry (static value and pulse) by `factor`.
  TimedHamiltonian with_scaled(Entry e, double factor) const;
  TimedHamiltonian time_reversed(double horizon) const;

  friend bool operator==(const TimedHamiltonian&, const TimedHamiltonian&);

 private:
  void check_entry(Entry e) const;

  Matrix base_;
  std::map<Entry, Pulse> pulses_;
};

TimedHamiltonian attach_pulse(const TimedHamiltonian& h, Entry entry, const Pulse& p);
Matrix evaluate_at(const TimedHamiltonian& h, double t);

// Five-site star: outer sites 1,2 (initial dimer), central node c, outer
// sites 3,4 (final dimer), stored in that matrix order.
namespace star {
inline constexpr Site s1 = 0;
inline constexpr Site s2 = 1;
inline constexpr Site c = 2;
inline constexpr Site s3 = 3;
inline constexpr Site s4 = 4;
inline constexpr std::size_t size = 5;
/// Entry of coupling J_n, n in 1..4.
Entry coupling(int n);
}  // namespace star

// Seven-site unit: dimer 1,2 - hub 3 - connector 4 - hub 5 - dimer 6,7.
namespace seven {
inline constexpr std::size_t size = 7;
/// Entry of coupling J_n, n in 1..6; site k maps to index k-1.
Entry coupling(int n);
}  // namespace seven

TimedHamiltonian build_star(const std::array<double, 4>& couplings,
                            const std::array<double, 5>& potentials);
TimedHamiltonian build_seven(const std::array<double, 6>& couplings,
                             const std::array<double, 7>& potentials);

enum class SiteRole { hub, dimer_upper, dimer_lower, connector };

struct Dimer {
  Site first = 0;
  Site second = 0;
  friend auto operator<=>(const Dimer&, const Dimer&) = default;
};

std::string to_string(const Dimer& d);

struct CellCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

struct SiteGraph {
  std::size_t n_sites = 0;
  std::vector<Entry> edges;
  std::vector<SiteRole> labels;
  std::vector<Dimer> dimers;
  std::vector<CellCoord> geometry;  // empty unless built from a lattice

  std::vector<Site> hubs() const;
  std::vector<Site> neighbors(Site s) const;
  bool has_edge(Site a, Site b) const;
  /// Throws if the structural invariants do not hold.
  void validate() const;
};

struct Lattice {
  SiteGraph graph;
  TimedHamiltonian hamiltonian;
};

SiteGraph star_graph();
SiteGraph seven_graph();

/// Decorated Lieb lattice patch with open boundaries. Each cell holds a hub
/// followed by its right dimer and its up dimer (5 sites); dimer sites couple
/// to the hub of their own cell and, when it exists, the neighbouring hub.
Lattice build_dll(std::size_t cells_x, std::size_t cells_y, double coupling, double potential);

}  // namespace clsnet
