#pragma once

#include <string>
#include <variant>

#include "clsnet/evolve.hpp"
#include "clsnet/lattice.hpp"

namespace clsnet {

/// Named single-excitation states of the star in matrix order (1, 2, c, 3, 4).
enum class StarState { initial, final, left, right, center };
StateVector star_state(StarState which);

/// Same names for the seven-site unit: dimers {1,2} and {6,7}, center = site 4.
StateVector seven_state(StarState which);

/// Uniform star with v = J(4k1/(1+2k2) - 2) and T = pi(1+2k2)/(2J): the
/// phases exp(-iET) of the three star eigenvalues become (-1, 1, 1) relative
/// to the dark states, which maps |L> onto |R>.
struct TransferParams {
  double v = 0.0;
  double T = 0.0;
  int k1 = 0;
  int k2 = 0;
  double J = 0.0;
};
TransferParams solve_transfer_params(int k1, int k2, double J);
/// Fastest transfer over k1 in [k1_min, k1_max], k2 in [k2_min, k2_max]:
/// smallest T, then smallest |v|, then v >= 0.
TransferParams fastest_transfer_params(double J, int k1_min = -2, int k1_max = 3, int k2_min = 0, int k2_max = 2);

/// Dimer coupled to the center with J'; branch 1:
/// v = sqrt2 J'(4k1'-1)/(1+4k2'), T = pi(4k1'-1)/(2v); branch 2:
/// v = sqrt2 J'(4k1'+1)/(4k2'-1), T = pi(4k1'+1)/(2v).
struct GenerationParams {
  int branch = 2;
  int k1p = 0;
  int k2p = 1;
  double Jp = 0.0;
  double v = 0.0;
  double T = 0.0;
};
GenerationParams solve_generation_params(int branch, int k1p, int k2p, double Jp);

/// Seven-site transfer: J3 = J4 = sqrt3 J, T = pi(2k+1)/(sqrt2 J), other
/// couplings J and uniform potential v.
struct SevenTransferParams {
  double J = 1.0;
  double v = 0.0;
  int k = 0;
  double T = 0.0;
};
SevenTransferParams solve_seven_transfer_params(int k, double J, double v = 0.0);

StateVector phase_flip(const StateVector& psi, Site site);
/// Negates one off-diagonal coupling (and its mirror).
TimedHamiltonian hopping_flip(const TimedHamiltonian& h, Entry entry);

enum class GraphKind { star, seven };
enum class ProtocolVariant {
  phase_flip_transfer,
  hopping_flip_transfer,
  generation,
  reverse_generation,
  piecewise_transfer,
};
std::string to_string(ProtocolVariant v);
ProtocolVariant protocol_variant_from_string(const std::string& name);

/// Which amplitudes or couplings the flip-based transfers act on. The first
/// flip turns |I> into |L> (site 1 or 2), the second turns |R> into |F>
/// (site 3 or 4); the hopping variant flips one coupling of each dimer.
struct FlipOptions {
  Site first_site = star::s2;
  Site second_site = star::s4;
  int first_coupling = 1;
  int second_coupling = 3;
};

ProtocolSchedule star_transfer_schedule(const TransferParams& p, ProtocolVariant variant,
                                        const FlipOptions& flips = {});
/// generation: |c> -> |L> in T, then a flip of site 2 gives |I>.
/// reverse-generation: flip of site 2 turns |I> into |L>, then |L> -> |c> in T.
/// piecewise-transfer: reverse-generation on {1,2} followed by generation on {3,4}.
ProtocolSchedule star_generation_schedule(const GenerationParams& p, ProtocolVariant variant);
/// Phase flips on sites 2 and 7, or hopping flips of J2 and J6.
ProtocolSchedule seven_transfer_schedule(const SevenTransferParams& p, ProtocolVariant variant);

using ProtocolParams = std::variant<TransferParams, GenerationParams, SevenTransferParams>;

/// Dispatches to the builders above; invalid_argument on a graph/variant/params mismatch.
ProtocolSchedule build_schedule(GraphKind graph, ProtocolVariant variant, const ProtocolParams& params,
                                const FlipOptions& flips = {});

}  // namespace clsnet
