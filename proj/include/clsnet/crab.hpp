#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "clsnet/evolve.hpp"
#include "clsnet/lattice.hpp"

namespace clsnet {

enum class AnsatzKind { star_transfer, seven_transfer, star_creation, seven_creation };
std::string to_string(AnsatzKind kind);
AnsatzKind ansatz_kind_from_string(const std::string& name);

/// Pulse coefficients. Channel n of a transfer ansatz uses x[n], xp[n],
/// omega[n]; the star creation ansatz has one x, one xp and the two
/// frequencies (omega, omega') of its single modulated channel.
struct CrabParams {
  std::vector<double> x;
  std::vector<double> xp;
  std::vector<double> omega;
  double floor = 0.0;    // J for transfer ansätze, amplitude 3*sqrt2 for star creation
  double horizon = 0.0;  // T

  friend bool operator==(const CrabParams&, const CrabParams&) = default;
};

std::size_t channel_count(AnsatzKind kind);
/// Throws invalid_argument on arity mismatch or a non-positive horizon.
void check_params(AnsatzKind kind, const CrabParams& p);

/// Channel n as a pulse, in the printed closed form.
Pulse ansatz_pulse(AnsatzKind kind, std::size_t n, const CrabParams& p);
double eval_pulse(AnsatzKind kind, std::size_t n, double t, const CrabParams& p);

/// Control problem: a static Hamiltonian whose channel entries are driven
/// by the ansatz pulses, optionally run backwards in time (t -> T - t).
struct CrabProblem {
  std::string name;
  AnsatzKind kind = AnsatzKind::star_transfer;
  TimedHamiltonian hamiltonian;       // fixed parts, including fixed pulses
  std::vector<Entry> channels;        // channel n drives channels[n]
  bool time_reversed = false;
  StateVector initial;
  StateVector target;
  double floor = 0.0;
  double horizon = 0.0;
  std::size_t objective_steps = 128;  // fixed-step resolution used while searching
};

/// Five-site star, J = 1/4, v = 1/2, T = 2pi, |I> -> |F>.
CrabProblem star_transfer_problem();
/// Seven-site unit, J = 1/(4 sqrt2), J3 = J4 = 3, v = 1/2, T = 4pi, |I> -> |F>;
/// channels J1, J2, J5, J6.
CrabProblem seven_transfer_problem();
/// Star, |c> -> |I> in T = pi with J3 = J4 = 0, v = 1/2. The printed pulses
/// ramp the couplings from 3*sqrt2 down to zero and carry |I> to |c>; this
/// problem binds their time reverse.
CrabProblem star_creation_problem();
/// Seven-site unit, |site 4> -> |I> in T = 2pi with J3(t) = t/(2pi), J4 = 0,
/// J5 = J6 = J, v = 1/2; channels J1, J2.
CrabProblem seven_creation_problem();
CrabProblem crab_problem(AnsatzKind kind);

/// Published coefficient sets (4 decimals) for each ansatz.
CrabParams reference_params(AnsatzKind kind);

TimedHamiltonian bind(const CrabProblem& problem, const CrabParams& p);

/// 1 - |<target|psi(T)>|^2 with `steps` fixed integrator steps.
double infidelity_objective(const CrabProblem& problem, const CrabParams& p, std::size_t steps);
/// Same with the adaptive integrator.
double infidelity_adaptive(const CrabProblem& problem, const CrabParams& p, const EvolveOptions& options = {});

struct NelderMeadOptions {
  std::size_t max_evals = 20000;
  double spread_tol = 1e-12;  // stop once f_max - f_min over the simplex falls below this
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Reflection 1, expansion 2, contraction 1/2, shrink 1/2; the initial
/// simplex steps each coordinate by 5% (0.05 where it is zero). Throws
/// non_finite if the objective returns a non-finite value.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options = {});

struct OptimizeOptions {
  std::size_t restarts = 32;
  std::uint64_t seed = 0;
  std::pair<double, double> omega_range{0.4, 2.6};
  std::pair<double, double> amplitude_range{0.0, 3.0};
  NelderMeadOptions nelder_mead;
  /// Put the frequencies into the simplex as well (default: amplitudes only).
  bool optimize_omega = false;
  std::size_t objective_steps = 0;  // 0: problem default
  /// Tolerance for the final re-propagation of the best result.
  double verify_tol = 1e-12;
  /// Worker threads; results never depend on this.
  std::size_t workers = 1;
};

struct RestartRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;  // sub-generator seed
  std::vector<double> omega;
  double infidelity = 1.0;  // at the search resolution
  std::size_t evaluations = 0;
};

struct OptResult {
  CrabParams best_params;
  double infidelity = 1.0;  // re-propagated with the adaptive integrator
  double search_infidelity = 1.0;
  std::size_t evaluations = 0;
  std::size_t restarts_used = 0;
  std::size_t best_restart = 0;
  std::uint64_t seed = 0;
  std::vector<RestartRecord> restarts;
};

/// Random-frequency multistart: restart i draws omega from omega_range and
/// amplitudes from amplitude_range with its own generator, seeded from
/// (seed, i), then runs Nelder-Mead. The best run by (infidelity, index) wins.
OptResult optimize_crab(const CrabProblem& problem, const OptimizeOptions& options);

/// Nelder-Mead from `start` (amplitudes only unless options.optimize_omega).
OptResult refine_crab(const CrabProblem& problem, const CrabParams& start, const OptimizeOptions& options = {});

/// Minimum over n uniform samples of channel `channel` on [0, horizon].
double min_pulse_value(AnsatzKind kind, std::size_t channel, const CrabParams& p, std::size_t samples = 10000);

}  // namespace clsnet
