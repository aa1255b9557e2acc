#include "clsnet/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "clsnet/commands.hpp"
#include "clsnet/crab.hpp"
#include "clsnet/evolve.hpp"
#include "clsnet/protocols.hpp"
#include "clsnet/routing.hpp"
#include "clsnet/spectral.hpp"

namespace clsnet {
namespace {

const double sqrt2 = std::sqrt(2.0);

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Checks {
 public:
  void expect(bool ok, const std::string& what) { (ok ? passed_ : failed_).push_back(what); }
  bool ok() const { return failed_.empty(); }
  std::string detail() const {
    std::string out;
    for (const auto& f : failed_) out += (out.empty() ? "" : "; ") + std::string("FAILED ") + f;
    for (const auto& p : passed_) out += (out.empty() ? "" : "; ") + p;
    return out;
  }

 private:
  std::vector<std::string> failed_;
  std::vector<std::string> passed_;
};

void fidelity_at_least(Checks& c, const std::string& what, double f, double bound) {
  c.expect(f >= 1.0 - bound, what + " 1-F=" + sci(1.0 - f) + " (<= " + sci(bound) + ")");
}

void below(Checks& c, const std::string& what, double value, double bound) {
  c.expect(value < bound, what + "=" + sci(value) + " (< " + sci(bound) + ")");
}

// exp(a) by scaling and squaring of a 30-term Taylor series; shares no code
// with the propagators under test.
CMatrix taylor_expm(const CMatrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const CMatrix b = a / std::ldexp(1.0, squarings);
  const auto n = a.rows();
  CMatrix term = CMatrix::Identity(n, n);
  CMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

CVector oracle_evolve(const Matrix& h, const CVector& psi, double t) {
  const CMatrix a = Complex(0.0, -t) * h.cast<Complex>();
  return taylor_expm(a) * psi;
}

double max_abs_diff(const CVector& a, const CVector& b) { return (a - b).cwiseAbs().maxCoeff(); }

std::size_t sample_index(const Trajectory& tr, double t) {
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (std::abs(tr.times[i] - t) < 1e-9) return i;
  }
  throw Error(ErrorCode::invalid_argument, "no trajectory sample at t=" + format_real(t));
}

RunOptions sampled(double dt) {
  RunOptions o;
  o.sample_dt = dt;
  return o;
}

// 1. Star phase-flip transfer ------------------------------------------------
void criterion_1(Checks& c) {
  const auto start = std::chrono::steady_clock::now();
  const TransferParams tp = solve_transfer_params(1, 0, 0.25);
  c.expect(std::abs(tp.v - 0.5) < 1e-15 && std::abs(tp.T - 2.0 * pi) < 1e-12,
           "v=" + format_real(tp.v) + " T=" + format_real(tp.T));
  const ProtocolSchedule s = star_transfer_schedule(tp, ProtocolVariant::phase_flip_transfer);
  const Trajectory tr = run_schedule(s, s.initial, sampled(tp.T / 8.0));
  fidelity_at_least(c, "|<F|psi(T)>|^2", fidelity(tr.final_state(), star_state(StarState::final)), 1e-10);
  c.expect(tr.max_norm_drift() <= 1e-10, "norm drift " + sci(tr.max_norm_drift()));
  // psi(T/2) against exp(-iHT/2)|L> from an independent series.
  const std::size_t mid = sample_index(tr, tp.T / 2.0);
  const CVector expected =
      oracle_evolve(s.hamiltonian.base(), star_state(StarState::left).amplitudes(), tr.times[mid]);
  const double phase_err = max_abs_diff(tr.states[mid].amplitudes(), expected);
  c.expect(phase_err <= 1e-10, "exp(-iEt) phases at T/2, max deviation " + sci(phase_err) + " (<= 1e-10)");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 1.0, "runtime " + sci(secs) + " s (< 1 s)");
}

// 2. Star hopping-flip transfer ---------------------------------------------
void criterion_2(Checks& c) {
  const TransferParams tp = solve_transfer_params(1, 0, 0.25);
  const auto phase_s = star_transfer_schedule(tp, ProtocolVariant::phase_flip_transfer);
  const auto hop_s = star_transfer_schedule(tp, ProtocolVariant::hopping_flip_transfer);
  const Trajectory phase = run_schedule(phase_s, phase_s.initial, sampled(tp.T / 64.0));
  const Trajectory hop = run_schedule(hop_s, hop_s.initial, sampled(tp.T / 64.0));
  fidelity_at_least(c, "hopping |<F|psi(T)>|^2", fidelity(hop.final_state(), star_state(StarState::final)), 1e-10);
  if (phase.times != hop.times) {
    c.expect(false, "sample grids differ");
    return;
  }
  double profile = 0.0;
  double signs = 0.0;
  const CVector flip = (CVector(5) << 1.0, -1.0, -1.0, 1.0, -1.0).finished();
  for (std::size_t i = 0; i < phase.times.size(); ++i) {
    const CVector& a = phase.states[i].amplitudes();
    const CVector& b = hop.states[i].amplitudes();
    profile = std::max(profile, (a.cwiseAbs() - b.cwiseAbs()).cwiseAbs().maxCoeff());
    if (phase.times[i] > 0.0 && phase.times[i] < tp.T) {
      signs = std::max(signs, max_abs_diff(b, flip.cwiseProduct(a)));
    }
  }
  c.expect(profile <= 1e-10, "max ||psi_i| hop - |psi_i| phase| " + sci(profile) + " over " +
                                 std::to_string(phase.times.size()) + " samples (<= 1e-10)");
  c.expect(signs <= 1e-10, "psi_2, psi_c, psi_4 sign-flipped in (0,T), deviation " + sci(signs));
}

// 3. Transfer family ---------------------------------------------------------
void criterion_3(Checks& c) {
  double worst = 0.0;
  int runs = 0;
  std::string worst_at;
  for (int k1 = -2; k1 <= 3; ++k1) {
    for (int k2 = 0; k2 <= 2; ++k2) {
      const TransferParams tp = solve_transfer_params(k1, k2, 0.25);
      if (!(tp.T > 0.0)) continue;
      const auto s = star_transfer_schedule(tp, ProtocolVariant::phase_flip_transfer);
      const double inf = 1.0 - fidelity(run_schedule(s, s.initial).final_state(), s.target);
      ++runs;
      if (inf > worst || worst_at.empty()) {
        worst = std::max(worst, inf);
        worst_at = "(" + std::to_string(k1) + "," + std::to_string(k2) + ")";
      }
    }
  }
  c.expect(runs == 18, std::to_string(runs) + " (k1,k2) pairs with T>0");
  c.expect(worst <= 1e-10, "worst 1-F=" + sci(worst) + " at " + worst_at + " (<= 1e-10)");
}

// 4. Generation ---------------------------------------------------------------
void criterion_4(Checks& c) {
  const double jp = 3.0 * sqrt2 * 0.25;
  const GenerationParams gp = solve_generation_params(2, 0, 1, jp);
  c.expect(std::abs(gp.v - 0.5) < 1e-12 && std::abs(gp.T - pi) < 1e-12,
           "J'=3sqrt2 J gives v=" + format_real(gp.v) + " T=" + format_real(gp.T));
  const Matrix h = build_star({jp, jp, 0.0, 0.0}, {gp.v, gp.v, gp.v, gp.v, gp.v}).base();
  const StateVector psi = evolve_static(h, star_state(StarState::center), gp.T);
  fidelity_at_least(c, "|<L|psi(T)>|^2", fidelity(psi, star_state(StarState::left)), 1e-10);
  fidelity_at_least(c, "after flip |<I|psi>|^2", fidelity(phase_flip(psi, star::s2), star_state(StarState::initial)),
                    1e-10);
  const auto s = star_generation_schedule(gp, ProtocolVariant::generation);
  fidelity_at_least(c, "schedule |<I|psi>|^2", fidelity(run_schedule(s, s.initial).final_state(), s.target), 1e-10);

  const double big = 3.0 * sqrt2;
  const Matrix h_main = build_star({big, big, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5, 0.5}).base();
  const double f_main = fidelity(evolve_static(h_main, star_state(StarState::center), pi), star_state(StarState::left));
  c.expect(f_main < 1.0 - 1e-10, "J'=3sqrt2 reading fails as asserted, F=" + sci(f_main));
}

// 5. Piecewise transfer -------------------------------------------------------
void criterion_5(Checks& c) {
  const GenerationParams gp = solve_generation_params(2, 0, 1, 3.0 * sqrt2 * 0.25);
  const auto s = star_generation_schedule(gp, ProtocolVariant::piecewise_transfer);
  c.expect(std::abs(s.duration - 2.0 * pi) < 1e-12, "total time " + format_real(s.duration) + " (2pi)");
  const Trajectory tr = run_schedule(s, s.initial);
  fidelity_at_least(c, "|<F|psi(2pi)>|^2", fidelity(tr.final_state(), star_state(StarState::final)), 1e-10);
}

// CRAB criteria --------------------------------------------------------------
struct CrabCheck {
  double direct = 1.0;
  OptResult refined;
};

CrabCheck crab_check(Checks& c, AnsatzKind kind, double refined_bound) {
  const CrabProblem problem = crab_problem(kind);
  const CrabParams ref = reference_params(kind);
  CrabCheck out;
  out.direct = infidelity_adaptive(problem, ref);
  below(c, to_string(kind) + " direct 1-F", out.direct, 1e-4);
  out.refined = refine_crab(problem, ref);
  below(c, to_string(kind) + " refined 1-F", out.refined.infidelity, refined_bound);
  c.expect(true, "search objective " + sci(out.refined.search_infidelity) + " after " +
                     std::to_string(out.refined.evaluations) + " evaluations");
  return out;
}

void criterion_6(Checks& c) {
  const auto start = std::chrono::steady_clock::now();
  const CrabCheck r = crab_check(c, AnsatzKind::star_transfer, 1e-8);
  double floor_gap = 1e300;
  for (std::size_t n = 0; n < 4; ++n) {
    floor_gap = std::min(floor_gap, min_pulse_value(AnsatzKind::star_transfer, n, r.refined.best_params) - 0.25);
  }
  c.expect(floor_gap >= -1e-15, "refined pulses stay >= J (min - J = " + sci(floor_gap) + ")");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 60.0, "runtime " + sci(secs) + " s (< 60 s)");
}

void criterion_7(Checks& c) {
  const CrabCheck r = crab_check(c, AnsatzKind::star_creation, 1e-8);
  const double min_ref = min_pulse_value(AnsatzKind::star_creation, 0, reference_params(AnsatzKind::star_creation));
  const double min_opt = min_pulse_value(AnsatzKind::star_creation, 0, r.refined.best_params);
  c.expect(min_ref < 0.0 && min_opt < 0.0,
           "min_t J1(t): printed " + sci(min_ref) + ", refined " + sci(min_opt) + " (< 0)");
}

void criterion_8(Checks& c) {
  const double r3 = std::sqrt(3.0);
  const Matrix h = build_seven({1.0, 1.0, r3, r3, 1.0, 1.0}, {0, 0, 0, 0, 0, 0, 0}).base();
  const Vector ev = spectrum(h).eigenvalues;
  const std::vector<double> expected = {-2 * sqrt2, -sqrt2, 0.0, 0.0, 0.0, sqrt2, 2 * sqrt2};
  double dev = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    dev = std::max(dev, std::abs(ev(static_cast<Eigen::Index>(i)) - expected[i]));
  }
  c.expect(dev <= 1e-12, "eigenvalues {0,0,0,+-sqrt2,+-2sqrt2}, max deviation " + sci(dev));
  const SevenTransferParams sp = solve_seven_transfer_params(0, 1.0, 0.0);
  c.expect(std::abs(sp.T - pi / sqrt2) < 1e-12, "T=" + format_real(sp.T) + " (pi/sqrt2)");
  for (auto v : {ProtocolVariant::phase_flip_transfer, ProtocolVariant::hopping_flip_transfer}) {
    const auto s = seven_transfer_schedule(sp, v);
    fidelity_at_least(c, to_string(v), fidelity(run_schedule(s, s.initial).final_state(), s.target), 1e-10);
  }
}

void criterion_9(Checks& c) {
  crab_check(c, AnsatzKind::seven_transfer, 1e-7);
  crab_check(c, AnsatzKind::seven_creation, 1e-7);
}

// 10. Partition theorems ----------------------------------------------------
double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void check_partition(const Matrix& h, const PartitionBlocks& pb, double& spec_dev, double& residual) {
  Vector u = pb.union_eigenvalues();
  std::sort(u.data(), u.data() + u.size());
  const Vector full = spectrum(h).eigenvalues;
  if (u.size() != full.size()) {
    spec_dev = 1e300;
    return;
  }
  spec_dev = std::max(spec_dev, (u - full).cwiseAbs().maxCoeff());
  const Matrix vecs = pb.lifted_eigenvectors();
  const Vector vals = pb.lifted_eigenvalues();
  for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
    residual = std::max(residual, (h * vecs.col(k) - vals(k) * vecs.col(k)).cwiseAbs().maxCoeff());
  }
}

void criterion_10(Checks& c) {
  std::mt19937_64 gen(20240611);
  double star_dev = 0.0, star_res = 0.0, seven_dev = 0.0, seven_res = 0.0;
  const Permutation swaps{1, 0, 2, 4, 3};
  for (int trial = 0; trial < 100; ++trial) {
    if (trial % 2 == 0) {
      const double j = uniform(gen, 0.1, 2.0);
      const double vo = uniform(gen, -1.0, 1.0);
      const Matrix h = build_star({j, j, j, j}, {vo, vo, uniform(gen, -1.0, 1.0), vo, vo}).base();
      check_partition(h, equitable_blocks_star(h), star_dev, star_res);
    } else {
      const double ja = uniform(gen, 0.1, 2.0), jb = uniform(gen, 0.1, 2.0);
      const double va = uniform(gen, -1.0, 1.0), vb = uniform(gen, -1.0, 1.0);
      const Matrix h = build_star({ja, ja, jb, jb}, {va, va, uniform(gen, -1.0, 1.0), vb, vb}).base();
      check_partition(h, equitable_blocks(h, swaps), star_dev, star_res);
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const double j1 = uniform(gen, 0.1, 2.0), j2 = uniform(gen, 0.1, 2.0);
    const double j3 = uniform(gen, 0.1, 2.0), j4 = uniform(gen, 0.1, 2.0);
    const double v1 = uniform(gen, -1.0, 1.0), v2 = uniform(gen, -1.0, 1.0), v3 = uniform(gen, -1.0, 1.0);
    const double v4 = uniform(gen, -1.0, 1.0);
    const Matrix h = build_seven({j1, j2, j3, j4, j2, j1}, {v1, v2, v3, v4, v3, v2, v1}).base();
    check_partition(h, nonequitable_blocks_seven(h), seven_dev, seven_res);
  }
  c.expect(star_dev <= 1e-12, "star (100 trials) block spectra deviation " + sci(star_dev));
  c.expect(star_res <= 1e-12, "star lifted residual " + sci(star_res));
  c.expect(seven_dev <= 1e-12, "seven-site (100 trials) block spectra deviation " + sci(seven_dev));
  c.expect(seven_res <= 1e-12, "seven-site lifted residual " + sci(seven_res));
}

// 11. CLS protection ----------------------------------------------------------
void criterion_11(Checks& c) {
  // (a) symmetric driving of the dimer's own couplings and potentials.
  {
    const double T = 2.0 * pi;
    const Pulse drive = Pulse::crab_star(0.25, 1.3, -0.7, 1.1);
    const double va = 0.5, vb = 1.0;
    const Pulse pot = Pulse::linear_ramp(va, vb, 0.0, T);
    TimedHamiltonian h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5})
                             .with_pulse(star::coupling(1), drive)
                             .with_pulse(star::coupling(2), drive)
                             .with_pulse(star::coupling(3), Pulse::crab_star(0.25, 0.4, 2.0, 0.8))
                             .with_pulse(Entry(star::s1, star::s1), pot)
                             .with_pulse(Entry(star::s2, star::s2), pot);
    ProtocolSchedule s;
    s.name = "driven";
    s.hamiltonian = h;
    s.duration = T;
    s.initial = star_state(StarState::initial);
    s.target = s.initial;
    const Trajectory tr = run_schedule(s, s.initial, sampled(T / 50.0));
    double worst = 0.0, phase = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double t = tr.times[i];
      worst = std::max(worst, 1.0 - fidelity(tr.states[i], s.initial));
      // Global phase exp(-i int_0^t v) of the stored CLS.
      const double integral = va * t + (vb - va) * t * t / (2.0 * T);
      const CVector expected = std::exp(Complex(0.0, -integral)) * s.initial.amplitudes();
      phase = std::max(phase, max_abs_diff(tr.states[i].amplitudes(), expected));
    }
    c.expect(worst <= 1e-10, "(a) driven |I>: worst 1-F=" + sci(worst) + " over " +
                                 std::to_string(tr.times.size()) + " samples");
    c.expect(phase <= 1e-10, "(a) global phase exp(-i int v dt) deviation " + sci(phase));
  }
  // (b) perturbations outside the CLS domain on DLL(2,2).
  {
    const Lattice dll = build_dll(2, 2, 0.25, 0.5);
    const Matrix& h = dll.hamiltonian.base();
    const auto states = find_cls(h, 2);
    std::mt19937_64 gen(7);
    double worst = 0.0;
    std::size_t trials = 0;
    bool found_all = true;
    for (const auto& cls : states) {
      for (int rep = 0; rep < 3; ++rep) {
        Matrix p = h;
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          for (Eigen::Index j = i; j < h.cols(); ++j) {
            const auto in = [&](Eigen::Index s) {
              return std::find(cls.support.begin(), cls.support.end(), static_cast<Site>(s)) != cls.support.end();
            };
            if (in(i) || in(j)) continue;
            const double d = uniform(gen, -0.5, 0.5);
            p(i, j) += d;
            if (i != j) p(j, i) += d;
          }
        }
        bool found = false;
        for (const auto& again : find_cls(p, 2)) {
          if (again.support == cls.support) {
            worst = std::max(worst, 1.0 - fidelity(again.vector, cls.vector));
            found = true;
          }
        }
        found_all = found_all && found;
        ++trials;
      }
    }
    c.expect(states.size() == 8, "(b) DLL(2,2) CLS count " + std::to_string(states.size()));
    c.expect(found_all, "(b) every CLS re-detected after " + std::to_string(trials) + " perturbations");
    c.expect(worst <= 1e-12, "(b) worst 1-overlap " + sci(worst) + " (<= 1e-12)");
  }
  // (c) asymmetric ramp-down of the dimer couplings.
  {
    const double tol = EvolveOptions{}.tol;
    const double dt = 1.0;
    const TimedHamiltonian base = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5});
    auto leakage = [&](double stretch) {
      ProtocolSchedule s;
      s.name = "ramp";
      s.hamiltonian = base.with_pulse(star::coupling(1), Pulse::linear_ramp(0.25, 0.0, 0.0, dt))
                          .with_pulse(star::coupling(2), Pulse::linear_ramp(0.25, 0.0, 0.0, stretch * dt));
      s.duration = 1.1 * dt;
      s.initial = star_state(StarState::initial);
      s.target = s.initial;
      return 1.0 - fidelity(run_schedule(s, s.initial).final_state(), s.initial);
    };
    const double sym = leakage(1.0);
    const double asym = leakage(1.1);
    c.expect(asym > 100.0 * tol, "(c) 10% ramp asymmetry leakage " + sci(asym) + " (> " + sci(100.0 * tol) + ")");
    c.expect(sym <= 100.0 * tol, "(c) symmetric ramp leakage " + sci(sym));
  }
}

// 12. Routing -------------------------------------------------------------------
std::size_t shared_star_violations(const Timeline& tl) {
  std::size_t bad = 0;
  const double d = tl.timing.jump_duration(tl.coupling);
  for (std::size_t a = 0; a < tl.routes.size(); ++a) {
    for (std::size_t b = a + 1; b < tl.routes.size(); ++b) {
      for (std::size_t i = 0; i < tl.routes[a].jumps.size(); ++i) {
        for (std::size_t j = 0; j < tl.routes[b].jumps.size(); ++j) {
          const double sa = tl.jump_start(a, i), sb = tl.jump_start(b, j);
          if (!(sa < sb + d && sb < sa + d)) continue;
          const auto x = tl.routes[a].jumps[i].star.sites();
          const auto y = tl.routes[b].jumps[j].star.sites();
          for (Site s : x) {
            if (std::find(y.begin(), y.end(), s) != y.end()) ++bad;
          }
        }
      }
    }
  }
  return bad;
}

void criterion_12(Checks& c) {
  const auto start = std::chrono::steady_clock::now();
  RouteTiming timing;
  timing.ramp = 1.0;
  {
    const Lattice l = build_dll(1, 1, 0.25, 0.5);
    const Timeline tl = schedule_multi(l, {plan_route(l, {1, 2}, {3, 4})}, timing);
    fidelity_at_least(c, "DLL(1,1) single jump", simulate_route(l, tl).fidelities[0], 1e-10);
  }
  const Lattice l = build_dll(3, 3, 0.25, 0.5);
  {
    const RoutePlan plan = plan_route(l, {3, 4}, {26, 27});
    const Timeline tl = schedule_multi(l, {plan}, timing);
    const RouteReport rep = simulate_route(l, tl);
    c.expect(plan.jumps.size() == 3, "DLL(3,3) route (3,4)->(26,27) has " + std::to_string(plan.jumps.size()) +
                                         " jumps");
    fidelity_at_least(c, "3-jump end-to-end", rep.fidelities[0], 1e-8);
  }
  {
    const std::vector<RoutePlan> plans = {plan_route(l, {16, 17}, {26, 27}), plan_route(l, {8, 9}, {38, 39})};
    const Timeline tl = schedule_multi(l, plans, timing);
    const RouteReport rep = simulate_route(l, tl);
    fidelity_at_least(c, "crossing route A", rep.fidelities[0], 1e-8);
    fidelity_at_least(c, "crossing route B", rep.fidelities[1], 1e-8);
    c.expect(tl.waits[1] > 0.0, "scheduler delayed route B by " + format_real(tl.waits[1]));
    const std::size_t bad = shared_star_violations(tl);
    c.expect(bad == 0, "post-hoc shared-star check: " + std::to_string(bad) + " overlaps");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 120.0, "runtime " + sci(secs) + " s (< 120 s)");
}

// 13. Global numerics ---------------------------------------------------------
std::string serialize(const OptResult& r) {
  std::ostringstream os;
  os << format_real(r.infidelity) << ' ' << format_real(r.search_infidelity) << ' ' << r.evaluations << ' '
     << r.best_restart;
  for (double v : r.best_params.x) os << ' ' << format_real(v);
  for (double v : r.best_params.xp) os << ' ' << format_real(v);
  for (double v : r.best_params.omega) os << ' ' << format_real(v);
  for (const auto& rec : r.restarts) os << ' ' << rec.seed << ':' << format_real(rec.infidelity);
  return os.str();
}

void criterion_13(Checks& c) {
  // One more pass over representative scenarios, then the process-wide drift.
  const TransferParams tp = solve_transfer_params(1, 0, 0.25);
  auto trajectory_bytes = [&] {
    const auto s = star_transfer_schedule(tp, ProtocolVariant::hopping_flip_transfer);
    return trajectory_csv(run_schedule(s, s.initial, sampled(tp.T / 32.0)));
  };
  c.expect(trajectory_bytes() == trajectory_bytes(), "trajectory table byte-identical across runs");

  const CrabProblem problem = star_transfer_problem();
  OptimizeOptions opts;
  opts.restarts = 3;
  opts.seed = 1234;
  opts.nelder_mead.max_evals = 300;
  const std::string first = serialize(optimize_crab(problem, opts));
  const std::string second = serialize(optimize_crab(problem, opts));
  opts.workers = 3;
  const std::string threaded = serialize(optimize_crab(problem, opts));
  c.expect(first == second, "seeded multistart byte-identical across runs");
  c.expect(first == threaded, "seeded multistart identical with 3 workers");

  const Lattice l = build_dll(1, 1, 0.25, 0.5);
  auto route_bytes = [&] {
    const Timeline tl = schedule_multi(l, {plan_route(l, {1, 2}, {3, 4})}, RouteTiming{});
    const RouteReport rep = simulate_route(l, tl);
    std::string out;
    for (Eigen::Index i = 0; i < rep.final_states[0].amplitudes().size(); ++i) {
      const Complex a = rep.final_states[0].amplitudes()(i);
      out += format_real(a.real()) + "," + format_real(a.imag()) + ";";
    }
    return out;
  };
  c.expect(route_bytes() == route_bytes(), "route final state byte-identical across runs");

  const double drift = observed_norm_drift();
  c.expect(drift <= 1e-10, "max |norm-1| over every propagation in this run " + sci(drift) + " (<= 1e-10)");
}

struct CriterionEntry {
  int id;
  const char* title;
  void (*run)(Checks&);
};

const std::vector<CriterionEntry>& registry() {
  static const std::vector<CriterionEntry> r = {
      {1, "star phase-flip transfer", criterion_1},
      {2, "star hopping-flip transfer", criterion_2},
      {3, "transfer parameter family", criterion_3},
      {4, "CLS generation", criterion_4},
      {5, "piecewise transfer", criterion_5},
      {6, "CRAB star transfer", criterion_6},
      {7, "CRAB star creation", criterion_7},
      {8, "seven-site analytics", criterion_8},
      {9, "seven-site CRAB transfer and creation", criterion_9},
      {10, "partition theorems", criterion_10},
      {11, "CLS protection", criterion_11},
      {12, "routing", criterion_12},
      {13, "global numerics", criterion_13},
  };
  return r;
}

}  // namespace

std::vector<int> acceptance_ids() {
  std::vector<int> ids;
  for (const auto& e : registry()) ids.push_back(e.id);
  return ids;
}

std::string criterion_title(int id) {
  for (const auto& e : registry()) {
    if (e.id == id) return e.title;
  }
  throw Error(ErrorCode::config, "unknown criterion " + std::to_string(id));
}

std::vector<int> parse_selector(const std::string& selector) {
  if (selector.empty() || selector == "all") return acceptance_ids();
  std::vector<int> ids;
  std::stringstream ss(selector);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw Error(ErrorCode::config, "bad criterion selector '" + selector + "'");
    criterion_title(id);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  const std::vector<int> ids = options.selection.empty() ? acceptance_ids() : options.selection;
  std::optional<PropagatorSignFault> fault;
  if (options.inject_propagator_fault) fault.emplace();
  reset_norm_drift();
  std::vector<CriterionResult> results;
  for (int id : ids) {
    const auto it = std::find_if(registry().begin(), registry().end(), [&](const CriterionEntry& e) { return e.id == id; });
    if (it == registry().end()) throw Error(ErrorCode::config, "unknown criterion " + std::to_string(id));
    CriterionResult r;
    r.id = id;
    r.title = it->title;
    const auto start = std::chrono::steady_clock::now();
    Checks checks;
    try {
      it->run(checks);
      r.passed = checks.ok();
      r.detail = checks.detail();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string acceptance_json(const std::vector<CriterionResult>& results) {
  nlohmann::ordered_json j;
  j["criteria"] = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& r : results) {
    j["criteria"].push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}});
    all = all && r.passed;
  }
  j["passed"] = all;
  return j.dump(2) + "\n";
}

std::string format_result_line(const CriterionResult& r) {
  char head[32];
  std::snprintf(head, sizeof head, "%s %2d  ", r.passed ? "PASS" : "FAIL", r.id);
  char tail[32];
  std::snprintf(tail, sizeof tail, "  (%.2f s)", r.seconds);
  return head + r.title + ": " + r.detail + tail;
}

}  // namespace clsnet
