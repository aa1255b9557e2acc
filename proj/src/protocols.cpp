#include "clsnet/protocols.hpp"

#include <cmath>
#include <optional>
#include <tuple>

namespace clsnet {

namespace {

StateVector pair_state(std::size_t dim, Site a, Site b, double sign) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(a)) = 1.0 / std::sqrt(2.0);
  v(static_cast<Eigen::Index>(b)) = sign / std::sqrt(2.0);
  return StateVector(std::move(v));
}

void require_finite_positive(double value, const char* what) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must be finite and positive");
  }
}

TimedHamiltonian uniform_star(double j12, double j34, double v) {
  return build_star({j12, j12, j34, j34}, {v, v, v, v, v});
}

}  // namespace

StateVector star_state(StarState which) {
  switch (which) {
    case StarState::initial: return pair_state(star::size, star::s1, star::s2, -1.0);
    case StarState::final: return pair_state(star::size, star::s3, star::s4, -1.0);
    case StarState::left: return pair_state(star::size, star::s1, star::s2, 1.0);
    case StarState::right: return pair_state(star::size, star::s3, star::s4, 1.0);
    case StarState::center: return StateVector::basis(star::size, star::c);
  }
  throw Error(ErrorCode::invalid_argument, "unknown star state");
}

StateVector seven_state(StarState which) {
  switch (which) {
    case StarState::initial: return pair_state(seven::size, 0, 1, -1.0);
    case StarState::final: return pair_state(seven::size, 5, 6, -1.0);
    case StarState::left: return pair_state(seven::size, 0, 1, 1.0);
    case StarState::right: return pair_state(seven::size, 5, 6, 1.0);
    case StarState::center: return StateVector::basis(seven::size, 3);
  }
  throw Error(ErrorCode::invalid_argument, "unknown seven-site state");
}

TransferParams solve_transfer_params(int k1, int k2, double J) {
  if (!std::isfinite(J) || J == 0.0) throw Error(ErrorCode::invalid_argument, "transfer coupling must be nonzero");
  const double denom = 1.0 + 2.0 * k2;
  TransferParams p;
  p.k1 = k1;
  p.k2 = k2;
  p.J = J;
  p.v = J * (4.0 * k1 / denom - 2.0);
  p.T = pi * denom / (2.0 * J);
  if (!(p.T > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "transfer indices (k1=" + std::to_string(k1) + ", k2=" +
                                                 std::to_string(k2) + ") give a non-positive transfer time");
  }
  return p;
}

TransferParams fastest_transfer_params(double J, int k1_min, int k1_max, int k2_min, int k2_max) {
  std::optional<TransferParams> best;
  for (int k2 = k2_min; k2 <= k2_max; ++k2) {
    if (pi * (1.0 + 2.0 * k2) / (2.0 * J) <= 0.0) continue;
    for (int k1 = k1_min; k1 <= k1_max; ++k1) {
      const TransferParams p = solve_transfer_params(k1, k2, J);
      if (!best) {
        best = p;
        continue;
      }
      const auto key = [](const TransferParams& q) { return std::tuple(q.T, std::abs(q.v), q.v < 0.0); };
      if (key(p) < key(*best)) best = p;
    }
  }
  if (!best) throw Error(ErrorCode::invalid_argument, "no (k1, k2) in range gives a positive transfer time");
  return *best;
}

GenerationParams solve_generation_params(int branch, int k1p, int k2p, double Jp) {
  if (branch != 1 && branch != 2) throw Error(ErrorCode::invalid_argument, "generation branch must be 1 or 2");
  if (!std::isfinite(Jp) || Jp == 0.0) throw Error(ErrorCode::invalid_argument, "generation coupling must be nonzero");
  const double odd = branch == 1 ? 4.0 * k1p - 1.0 : 4.0 * k1p + 1.0;
  const double denom = branch == 1 ? 1.0 + 4.0 * k2p : 4.0 * k2p - 1.0;
  GenerationParams p;
  p.branch = branch;
  p.k1p = k1p;
  p.k2p = k2p;
  p.Jp = Jp;
  p.v = std::sqrt(2.0) * Jp * odd / denom;
  p.T = pi * odd / (2.0 * p.v);
  if (!(p.T > 0.0) || !std::isfinite(p.T)) {
    throw Error(ErrorCode::invalid_argument, "generation indices give a non-positive duration");
  }
  return p;
}

SevenTransferParams solve_seven_transfer_params(int k, double J, double v) {
  require_finite_positive(J, "seven-site coupling");
  if (k < 0) throw Error(ErrorCode::invalid_argument, "seven-site transfer index must be non-negative");
  return {J, v, k, pi * (2.0 * k + 1.0) / (std::sqrt(2.0) * J)};
}

StateVector phase_flip(const StateVector& psi, Site site) {
  if (site >= psi.dimension()) throw Error(ErrorCode::out_of_range, "phase flip site out of range");
  StateVector out = psi;
  out.amplitudes()(static_cast<Eigen::Index>(site)) *= -1.0;
  return out;
}

TimedHamiltonian hopping_flip(const TimedHamiltonian& h, Entry entry) {
  if (entry.diagonal()) throw Error(ErrorCode::invalid_argument, "hopping flip needs an off-diagonal entry");
  return h.with_scaled(entry, -1.0);
}

std::string to_string(ProtocolVariant v) {
  switch (v) {
    case ProtocolVariant::phase_flip_transfer: return "phase-flip-transfer";
    case ProtocolVariant::hopping_flip_transfer: return "hopping-flip-transfer";
    case ProtocolVariant::generation: return "generation";
    case ProtocolVariant::reverse_generation: return "reverse-generation";
    case ProtocolVariant::piecewise_transfer: return "piecewise-transfer";
  }
  return "unknown";
}

ProtocolVariant protocol_variant_from_string(const std::string& name) {
  for (auto v : {ProtocolVariant::phase_flip_transfer, ProtocolVariant::hopping_flip_transfer,
                 ProtocolVariant::generation, ProtocolVariant::reverse_generation,
                 ProtocolVariant::piecewise_transfer}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::invalid_argument, "unknown protocol '" + name + "'");
}

ProtocolSchedule star_transfer_schedule(const TransferParams& p, ProtocolVariant variant, const FlipOptions& flips) {
  require_finite_positive(p.T, "transfer time");
  ProtocolSchedule s;
  s.hamiltonian = uniform_star(p.J, p.J, p.v);
  s.duration = p.T;
  s.initial = star_state(StarState::initial);
  s.target = star_state(StarState::final);
  if (variant == ProtocolVariant::phase_flip_transfer) {
    if ((flips.first_site != star::s1 && flips.first_site != star::s2) ||
        (flips.second_site != star::s3 && flips.second_site != star::s4)) {
      throw Error(ErrorCode::invalid_argument, "phase flips must hit one site of each dimer");
    }
    s.name = "star-phase-flip-transfer";
    s.events = {{0.0, PhaseFlip{flips.first_site}}, {p.T, PhaseFlip{flips.second_site}}};
  } else if (variant == ProtocolVariant::hopping_flip_transfer) {
    if (flips.first_coupling < 1 || flips.first_coupling > 2 || flips.second_coupling < 3 ||
        flips.second_coupling > 4) {
      throw Error(ErrorCode::invalid_argument, "hopping flips must hit one coupling of each dimer");
    }
    s.name = "star-hopping-flip-transfer";
    const Entry a = star::coupling(flips.first_coupling);
    const Entry b = star::coupling(flips.second_coupling);
    s.events = {{0.0, HoppingFlip{a}}, {0.0, HoppingFlip{b}}, {p.T, HoppingFlip{a}}, {p.T, HoppingFlip{b}}};
  } else {
    throw Error(ErrorCode::invalid_argument, "transfer parameters do not fit protocol " + to_string(variant));
  }
  return s;
}

ProtocolSchedule star_generation_schedule(const GenerationParams& p, ProtocolVariant variant) {
  require_finite_positive(p.T, "generation time");
  ProtocolSchedule s;
  switch (variant) {
    case ProtocolVariant::generation:
      s.name = "star-generation";
      s.hamiltonian = uniform_star(p.Jp, 0.0, p.v);
      s.duration = p.T;
      s.initial = star_state(StarState::center);
      s.target = star_state(StarState::initial);
      s.events = {{p.T, PhaseFlip{star::s2}}};
      break;
    case ProtocolVariant::reverse_generation:
      s.name = "star-reverse-generation";
      s.hamiltonian = uniform_star(p.Jp, 0.0, p.v);
      s.duration = p.T;
      s.initial = star_state(StarState::initial);
      s.target = star_state(StarState::center);
      s.events = {{0.0, PhaseFlip{star::s2}}};
      break;
    case ProtocolVariant::piecewise_transfer:
      s.name = "star-piecewise-transfer";
      s.hamiltonian = uniform_star(p.Jp, 0.0, p.v);
      s.duration = 2.0 * p.T;
      s.initial = star_state(StarState::initial);
      s.target = star_state(StarState::final);
      s.events = {{0.0, PhaseFlip{star::s2}},
                  {p.T, Retune{uniform_star(0.0, p.Jp, p.v)}},
                  {2.0 * p.T, PhaseFlip{star::s4}}};
      break;
    default:
      throw Error(ErrorCode::invalid_argument, "generation parameters do not fit protocol " + to_string(variant));
  }
  return s;
}

ProtocolSchedule seven_transfer_schedule(const SevenTransferParams& p, ProtocolVariant variant) {
  require_finite_positive(p.T, "seven-site transfer time");
  const double j34 = std::sqrt(3.0) * p.J;
  ProtocolSchedule s;
  s.hamiltonian = build_seven({p.J, p.J, j34, j34, p.J, p.J}, {p.v, p.v, p.v, p.v, p.v, p.v, p.v});
  s.duration = p.T;
  s.initial = seven_state(StarState::initial);
  s.target = seven_state(StarState::final);
  if (variant == ProtocolVariant::phase_flip_transfer) {
    s.name = "seven-phase-flip-transfer";
    s.events = {{0.0, PhaseFlip{1}}, {p.T, PhaseFlip{6}}};
  } else if (variant == ProtocolVariant::hopping_flip_transfer) {
    s.name = "seven-hopping-flip-transfer";
    const Entry a = seven::coupling(2), b = seven::coupling(6);
    s.events = {{0.0, HoppingFlip{a}}, {0.0, HoppingFlip{b}}, {p.T, HoppingFlip{a}}, {p.T, HoppingFlip{b}}};
  } else {
    throw Error(ErrorCode::invalid_argument, "the seven-site unit has no protocol " + to_string(variant));
  }
  return s;
}

ProtocolSchedule build_schedule(GraphKind graph, ProtocolVariant variant, const ProtocolParams& params,
                                const FlipOptions& flips) {
  if (graph == GraphKind::seven) {
    const auto* p = std::get_if<SevenTransferParams>(&params);
    if (!p) throw Error(ErrorCode::invalid_argument, "seven-site schedules need seven-site transfer parameters");
    return seven_transfer_schedule(*p, variant);
  }
  if (const auto* p = std::get_if<TransferParams>(&params)) return star_transfer_schedule(*p, variant, flips);
  if (const auto* p = std::get_if<GenerationParams>(&params)) return star_generation_schedule(*p, variant);
  throw Error(ErrorCode::invalid_argument, "star schedules need transfer or generation parameters");
}

}  // namespace clsnet
