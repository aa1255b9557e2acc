#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clsnet/evolve.hpp"
#include "clsnet/lattice.hpp"
#include "clsnet/protocols.hpp"
#include "oracles.hpp"

using namespace clsnet;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::config;
}

// Driven two-level-like system on three sites with smooth time dependence.
HamiltonianFn driven(const Matrix& a, const Matrix& b, double omega) {
  return [a, b, omega](double t) -> Matrix { return a + std::sin(omega * t) * b; };
}

}  // namespace

TEST(Fidelity, OverlapSquared) {
  CVector a(2), b(2);
  a << 1.0, 0.0;
  b << 1.0, Complex(0.0, 1.0);
  EXPECT_NEAR(fidelity(StateVector::normalized(a), StateVector::normalized(b)), 0.5, 1e-15);
  EXPECT_EQ(code_of([] { fidelity(StateVector::basis(2, 0), StateVector::basis(3, 0)); }),
            ErrorCode::invalid_argument);
}

TEST(EvolveStatic, MatchesTaylorOracle) {
  std::mt19937_64 rng(3);
  for (int n : {2, 5, 9, 16}) {
    const Matrix h = oracle::random_symmetric(n, rng);
    const CVector psi = oracle::random_state(n, rng);
    for (double t : {0.0, 0.1, 1.7, 12.0}) {
      const auto out = evolve_static(h, StateVector(psi), t);
      EXPECT_LE((out.amplitudes() - oracle::propagate(h, psi, t)).norm(), 1e-11) << "n=" << n << " t=" << t;
      EXPECT_NEAR(out.norm(), 1.0, 1e-13);
    }
  }
}

TEST(EvolveStatic, RejectsBadInput) {
  Matrix h = Matrix::Identity(2, 2);
  h(0, 1) = 0.5;
  EXPECT_EQ(code_of([&] { evolve_static(h, StateVector::basis(2, 0), 1.0); }), ErrorCode::not_hermitian);
  Matrix nan = Matrix::Identity(2, 2);
  nan(1, 1) = NAN;
  EXPECT_EQ(code_of([&] { evolve_static(nan, StateVector::basis(2, 0), 1.0); }), ErrorCode::non_finite);
  EXPECT_EQ(code_of([] { evolve_static(Matrix::Identity(2, 2), StateVector::basis(3, 0), 1.0); }),
            ErrorCode::invalid_argument);
}

TEST(EvolveTimedep, MatchesFineRk4) {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_symmetric(4, rng, 0.5);
  const Matrix b = oracle::random_symmetric(4, rng, 0.5);
  const auto h = driven(a, b, 1.3);
  const CVector psi = oracle::random_state(4, rng);
  const auto out = evolve_timedep(h, StateVector(psi), 0.2, 3.2);
  const CVector ref = oracle::rk4(h, psi, 0.2, 3.2, 40000);
  EXPECT_LE((out.amplitudes() - ref).norm(), 1e-10);
}

TEST(EvolveTimedep, StaticHamiltonianAgreesWithSpectral) {
  std::mt19937_64 rng(9);
  const Matrix a = oracle::random_symmetric(5, rng);
  const CVector psi = oracle::random_state(5, rng);
  const HamiltonianFn h = [&](double) { return a; };
  const auto out = evolve_timedep(h, StateVector(psi), 0.0, 2.0);
  EXPECT_LE((out.amplitudes() - oracle::propagate(a, psi, 2.0)).norm(), 1e-11);
}

TEST(EvolveTimedep, FourthOrderConvergence) {
  std::mt19937_64 rng(13);
  const Matrix a = oracle::random_symmetric(3, rng);
  const Matrix b = oracle::random_symmetric(3, rng);
  const auto h = driven(a, b, 2.0);
  const CVector psi = oracle::random_state(3, rng);
  const CVector ref = oracle::rk4(h, psi, 0.0, 2.0, 100000);
  const double e1 = (propagate_fixed(h, StateVector(psi), 0.0, 2.0, 40).amplitudes() - ref).norm();
  const double e2 = (propagate_fixed(h, StateVector(psi), 0.0, 2.0, 80).amplitudes() - ref).norm();
  const double order = std::log2(e1 / e2);
  EXPECT_GT(order, 3.6);
  EXPECT_LT(order, 4.4);
}

TEST(EvolveTimedep, TimeDependentTruthUsesPulses) {
  const auto h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5})
                     .with_pulse(star::coupling(1), Pulse::crab_star(0.25, 1.0, 0.5, 1.1));
  const StateVector psi = StateVector::basis(5, star::c);
  const auto out = evolve_timedep(h, psi, 0.0, 2.0);
  const CVector ref = oracle::rk4([&](double t) { return h.at(t); }, psi.amplitudes(), 0.0, 2.0, 40000);
  EXPECT_LE((out.amplitudes() - ref).norm(), 1e-10);
}

TEST(EvolveTimedep, StepUnderflow) {
  const auto h = driven(Matrix::Identity(2, 2), Matrix::Ones(2, 2) * 40.0, 60.0);
  EvolveOptions opts;
  opts.tol = 1e-14;
  opts.max_steps = 64;
  EXPECT_EQ(code_of([&] { evolve_timedep(h, StateVector::basis(2, 0), 0.0, 10.0, opts); }),
            ErrorCode::step_underflow);
}

TEST(EvolveTimedep, ToleranceRange) {
  const HamiltonianFn h = [](double) { return Matrix::Identity(2, 2); };
  for (double tol : {1e-15, 1e-5, 0.0, -1.0}) {
    EvolveOptions opts;
    opts.tol = tol;
    EXPECT_EQ(code_of([&] { evolve_timedep(h, StateVector::basis(2, 0), 0.0, 1.0, opts); }),
              ErrorCode::invalid_argument)
        << tol;
  }
  EXPECT_EQ(code_of([&] { evolve_timedep(h, StateVector::basis(2, 0), 1.0, 0.0); }), ErrorCode::invalid_argument);
}

TEST(EvolveTimedep, ConvergedStepCountIsConsistent) {
  std::mt19937_64 rng(17);
  const auto h = driven(oracle::random_symmetric(3, rng), oracle::random_symmetric(3, rng), 1.0);
  const StateVector psi(oracle::random_state(3, rng));
  CVector converged;
  const std::size_t n = converged_step_count(h, psi, 0.0, 1.5, {}, &converged);
  EXPECT_GT(n, 0u);
  EXPECT_LE((propagate_fixed(h, psi, 0.0, 1.5, n).amplitudes() - converged).norm(), 1e-15);
  EXPECT_LE((evolve_timedep(h, psi, 0.0, 1.5).amplitudes() - converged).norm(), 1e-15);
}

TEST(SignFault, GivesConjugatedEvolution) {
  std::mt19937_64 rng(19);
  const Matrix h = oracle::random_symmetric(4, rng);
  const StateVector psi = StateVector::basis(4, 1);
  const auto normal = evolve_static(h, psi, 1.3);
  PropagatorSignFault fault;
  const auto flipped = evolve_static(h, psi, 1.3);
  // real H, real psi: exp(+iHt) psi = conj(exp(-iHt) psi)
  EXPECT_LE((flipped.amplitudes() - normal.amplitudes().conjugate()).norm(), 1e-12);
  EXPECT_GT((flipped.amplitudes() - normal.amplitudes()).norm(), 1e-3);
}

TEST(SignFault, ScopedToGuard) {
  const Matrix h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5}).base();
  const StateVector psi = StateVector::basis(5, 0);
  const auto before = evolve_static(h, psi, 1.0);
  { PropagatorSignFault fault; }
  EXPECT_LE((evolve_static(h, psi, 1.0).amplitudes() - before.amplitudes()).norm(), 0.0);
}

TEST(NormDrift, TracksPropagatorCalls) {
  reset_norm_drift();
  EXPECT_EQ(observed_norm_drift(), 0.0);
  std::mt19937_64 rng(23);
  const Matrix h = oracle::random_symmetric(6, rng);
  evolve_static(h, StateVector(oracle::random_state(6, rng)), 50.0);
  EXPECT_LE(observed_norm_drift(), 1e-12);
}

// ---------------------------------------------------------------------------
// Schedules

namespace {

ProtocolSchedule free_star(double duration) {
  ProtocolSchedule s;
  s.name = "free";
  s.hamiltonian = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5});
  s.duration = duration;
  s.initial = StateVector::basis(5, star::s1);
  s.target = StateVector::basis(5, star::s1);
  return s;
}

}  // namespace

TEST(Schedule, EmptyScheduleIsFreeEvolution) {
  const auto s = free_star(3.0);
  const auto traj = run_schedule(s, s.initial);
  ASSERT_EQ(traj.times.size(), 2u);
  EXPECT_DOUBLE_EQ(traj.times.back(), 3.0);
  const CVector ref = oracle::propagate(s.hamiltonian.base(), s.initial.amplitudes(), 3.0);
  EXPECT_LE((traj.final_state().amplitudes() - ref).norm(), 1e-12);
  EXPECT_TRUE(traj.events.empty());
}

TEST(Schedule, ZeroDurationGivesSingleSample) {
  auto s = free_star(0.0);
  s.events.push_back({0.0, PhaseFlip{star::s1}});
  RunOptions opts;
  opts.sample_dt = 0.1;
  const auto traj = run_schedule(s, s.initial, opts);
  ASSERT_EQ(traj.times.size(), 1u);
  EXPECT_NEAR(traj.final_state()[star::s1].real(), -1.0, 0.0);
}

TEST(Schedule, SamplingGrid) {
  const auto s = free_star(1.0);
  RunOptions opts;
  opts.sample_dt = 0.25;
  const auto traj = run_schedule(s, s.initial, opts);
  ASSERT_EQ(traj.times.size(), 5u);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    EXPECT_NEAR(traj.times[i], 0.25 * i, 1e-15);
    const CVector ref = oracle::propagate(s.hamiltonian.base(), s.initial.amplitudes(), traj.times[i]);
    EXPECT_LE((traj.states[i].amplitudes() - ref).norm(), 1e-12);
  }
  EXPECT_LE(traj.max_norm_drift(), 1e-13);
}

TEST(Schedule, EventsApplyAtTheirInstant) {
  auto s = free_star(2.0);
  s.events.push_back({0.5, PhaseFlip{star::c}});
  s.events.push_back({1.0, HoppingFlip{star::coupling(3)}});
  const auto traj = run_schedule(s, s.initial);
  const Matrix h0 = s.hamiltonian.base();
  CVector psi = oracle::propagate(h0, s.initial.amplitudes(), 0.5);
  psi(star::c) *= -1.0;
  psi = oracle::propagate(h0, psi, 0.5);
  Matrix h1 = h0;
  h1(star::s3, star::c) = h1(star::c, star::s3) = -0.25;
  psi = oracle::propagate(h1, psi, 1.0);
  EXPECT_LE((traj.final_state().amplitudes() - psi).norm(), 1e-12);
  ASSERT_EQ(traj.events.size(), 2u);
  EXPECT_EQ(traj.events[0].type, "phase-flip");
  EXPECT_EQ(traj.events[1].type, "hopping-flip");
}

TEST(Schedule, ConflictsAndMalformedEvents) {
  auto twice = free_star(1.0);
  twice.events = {{0.5, PhaseFlip{1}}, {0.5, PhaseFlip{1}}};
  EXPECT_EQ(code_of([&] { twice.validate(); }), ErrorCode::schedule_conflict);

  auto hop = free_star(1.0);
  hop.events = {{0.5, HoppingFlip{star::coupling(1)}}, {0.5, HoppingFlip{star::coupling(1)}}};
  EXPECT_EQ(code_of([&] { hop.validate(); }), ErrorCode::schedule_conflict);

  auto retune = free_star(1.0);
  retune.events = {{0.5, Retune{retune.hamiltonian}}, {0.5, HoppingFlip{star::coupling(1)}}};
  EXPECT_EQ(code_of([&] { retune.validate(); }), ErrorCode::schedule_conflict);

  auto distinct = free_star(1.0);
  distinct.events = {{0.5, PhaseFlip{1}}, {0.5, PhaseFlip{3}}, {0.5, HoppingFlip{star::coupling(2)}}};
  EXPECT_NO_THROW(distinct.validate());

  auto outside = free_star(1.0);
  outside.events = {{1.5, PhaseFlip{1}}};
  EXPECT_EQ(code_of([&] { outside.validate(); }), ErrorCode::invalid_argument);

  auto unordered = free_star(1.0);
  unordered.events = {{0.6, PhaseFlip{1}}, {0.2, PhaseFlip{2}}};
  EXPECT_EQ(code_of([&] { unordered.validate(); }), ErrorCode::invalid_argument);

  auto far = free_star(1.0);
  far.events = {{0.6, PhaseFlip{9}}};
  EXPECT_EQ(code_of([&] { far.validate(); }), ErrorCode::out_of_range);
}

TEST(Schedule, RetuneRestartsPulseClock) {
  auto s = free_star(2.0);
  const auto pulsed = s.hamiltonian.with_pulse(star::coupling(1), Pulse::linear_ramp(0.25, 1.0, 0.0, 1.0));
  s.events.push_back({1.0, Retune{pulsed}});
  const auto traj = run_schedule(s, s.initial);
  const CVector mid = oracle::propagate(s.hamiltonian.base(), s.initial.amplitudes(), 1.0);
  const CVector ref = oracle::rk4([&](double t) { return pulsed.at(t - 1.0); }, mid, 1.0, 2.0, 20000);
  EXPECT_LE((traj.final_state().amplitudes() - ref).norm(), 1e-10);
}

TEST(Schedule, TimeReversalUndoesProtocol) {
  const auto p = solve_transfer_params(1, 0, 0.25);
  auto s = star_transfer_schedule(p, ProtocolVariant::phase_flip_transfer);
  s.hamiltonian = s.hamiltonian.with_pulse(star::coupling(2), Pulse::crab_star(0.25, 0.8, 0.2, 1.3));
  const auto forward = run_schedule(s, s.initial);
  const auto back = reversed(s);
  const StateVector start(forward.final_state().amplitudes().conjugate());
  const auto traj = run_schedule(back, start);
  const StateVector expected(s.initial.amplitudes().conjugate());
  EXPECT_GE(fidelity(traj.final_state(), expected), 1.0 - 1e-8);
}

TEST(Schedule, FlattenSplitsAtHoppingEvents) {
  auto s = free_star(2.0);
  s.events = {{0.0, PhaseFlip{1}}, {0.5, HoppingFlip{star::coupling(1)}}, {2.0, PhaseFlip{3}}};
  const auto flat = flatten(s);
  ASSERT_EQ(flat.segments.size(), 2u);
  EXPECT_DOUBLE_EQ(flat.segments[0].t1, 0.5);
  EXPECT_DOUBLE_EQ(flat.segments[1].hamiltonian.base()(star::s1, star::c), -0.25);
  EXPECT_EQ(flat.phase_flips.size(), 2u);
}
