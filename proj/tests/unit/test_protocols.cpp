#include <gtest/gtest.h>

#include <cmath>

#include "clsnet/evolve.hpp"
#include "clsnet/protocols.hpp"
#include "oracles.hpp"

using namespace clsnet;

namespace {

oracle::CVec pair(int n, int a, int b, double sign) {
  oracle::CVec v = oracle::CVec::Zero(n);
  v(a) = 1.0 / std::sqrt(2.0);
  v(b) = sign / std::sqrt(2.0);
  return v;
}

Matrix star_matrix(double j12, double j34, double v) {
  Matrix h = Matrix::Identity(5, 5) * v;
  h(0, 2) = h(2, 0) = h(1, 2) = h(2, 1) = j12;
  h(3, 2) = h(2, 3) = h(4, 2) = h(2, 4) = j34;
  return h;
}

double run_fidelity(const ProtocolSchedule& s) {
  return fidelity(run_schedule(s, s.initial).final_state(), s.target);
}

}  // namespace

TEST(States, NamedStarStates) {
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(star_state(StarState::initial)[star::s1].real(), r, 1e-15);
  EXPECT_NEAR(star_state(StarState::initial)[star::s2].real(), -r, 1e-15);
  EXPECT_NEAR(star_state(StarState::right)[star::s4].real(), r, 1e-15);
  EXPECT_NEAR(star_state(StarState::center)[star::c].real(), 1.0, 0.0);
  EXPECT_NEAR(seven_state(StarState::final)[6].real(), -r, 1e-15);
  EXPECT_NEAR(seven_state(StarState::center)[3].real(), 1.0, 0.0);
}

TEST(TransferParams, ClosedForm) {
  const auto p = solve_transfer_params(1, 0, 0.25);
  EXPECT_NEAR(p.v, 0.5, 1e-15);
  EXPECT_NEAR(p.T, 2 * pi, 1e-14);
  const auto q = solve_transfer_params(3, 2, 1.0);
  EXPECT_NEAR(q.v, 12.0 / 5.0 - 2.0, 1e-15);
  EXPECT_NEAR(q.T, 5 * pi / 2, 1e-14);
  EXPECT_THROW(solve_transfer_params(1, 0, 0.0), Error);
  EXPECT_THROW(solve_transfer_params(1, -1, 1.0), Error);
}

TEST(TransferParams, FastestPicksShortestThenSlowestPotential) {
  // brute force over the same grid
  const double J = 0.25;
  int bk1 = 0, bk2 = 0;
  double bt = 1e300, bv = 1e300;
  for (int k2 = 0; k2 <= 2; ++k2) {
    for (int k1 = -2; k1 <= 3; ++k1) {
      const double t = pi * (1 + 2 * k2) / (2 * J);
      const double v = J * (4.0 * k1 / (1 + 2 * k2) - 2);
      if (t < bt - 1e-12 || (std::abs(t - bt) <= 1e-12 && (std::abs(v) < std::abs(bv) - 1e-12 ||
                                                           (std::abs(std::abs(v) - std::abs(bv)) <= 1e-12 && v >= 0)))) {
        bk1 = k1;
        bk2 = k2;
        bt = t;
        bv = v;
      }
    }
  }
  const auto p = fastest_transfer_params(J);
  EXPECT_EQ(p.k1, bk1);
  EXPECT_EQ(p.k2, bk2);
  EXPECT_EQ(p.k1, 1);
  EXPECT_NEAR(p.v, 0.5, 1e-15);
  EXPECT_GE(run_fidelity(star_transfer_schedule(p, ProtocolVariant::phase_flip_transfer)), 1 - 1e-10);

  const auto q = fastest_transfer_params(J, 2, 3, 1, 2);
  EXPECT_EQ(q.k2, 1);
  EXPECT_EQ(q.k1, 2);
  EXPECT_THROW(fastest_transfer_params(-J), Error);
  EXPECT_EQ(fastest_transfer_params(-J, -2, 3, -2, -1).k2, -1);
}

class StarTransfer : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(StarTransfer, OracleAndLibraryAgree) {
  const auto [k1, k2] = GetParam();
  const double J = 0.25;
  const auto p = solve_transfer_params(k1, k2, J);

  // independent run: flip site 2, evolve, flip site 4
  oracle::CVec psi = pair(5, 0, 1, -1.0);
  psi(1) *= -1.0;
  psi = oracle::propagate(star_matrix(J, J, p.v), psi, p.T);
  psi(4) *= -1.0;
  EXPECT_GE(oracle::overlap2(pair(5, 3, 4, -1.0), psi), 1.0 - 1e-12);

  const auto phase = star_transfer_schedule(p, ProtocolVariant::phase_flip_transfer);
  EXPECT_GE(run_fidelity(phase), 1.0 - 1e-12);
  const auto hopping = star_transfer_schedule(p, ProtocolVariant::hopping_flip_transfer);
  EXPECT_GE(run_fidelity(hopping), 1.0 - 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Indices, StarTransfer,
                         ::testing::Values(std::pair{1, 0}, std::pair{0, 0}, std::pair{2, 0}, std::pair{1, 1},
                                           std::pair{-1, 1}, std::pair{4, 3}));

TEST(StarTransfer, WrongTimeFails) {
  auto p = solve_transfer_params(1, 0, 0.25);
  p.T *= 0.8;
  EXPECT_LT(run_fidelity(star_transfer_schedule(p, ProtocolVariant::phase_flip_transfer)), 0.9);
}

TEST(StarTransfer, AlternativeFlipSites) {
  const auto p = solve_transfer_params(1, 0, 0.25);
  for (Site a : {star::s1, star::s2}) {
    for (Site b : {star::s3, star::s4}) {
      FlipOptions f;
      f.first_site = a;
      f.second_site = b;
      EXPECT_GE(run_fidelity(star_transfer_schedule(p, ProtocolVariant::phase_flip_transfer, f)), 1.0 - 1e-12);
    }
  }
  FlipOptions bad;
  bad.first_site = star::c;
  EXPECT_THROW(star_transfer_schedule(p, ProtocolVariant::phase_flip_transfer, bad), Error);
  FlipOptions hop;
  hop.first_coupling = 2;
  hop.second_coupling = 4;
  EXPECT_GE(run_fidelity(star_transfer_schedule(p, ProtocolVariant::hopping_flip_transfer, hop)), 1.0 - 1e-12);
}

TEST(Generation, ClosedForm) {
  const auto p = solve_generation_params(2, 0, 1, 0.25);
  EXPECT_NEAR(p.v, std::sqrt(2.0) * 0.25 / 3.0, 1e-15);
  EXPECT_NEAR(p.T, pi / (2 * p.v), 1e-13);
  const auto q = solve_generation_params(1, 1, 0, 0.25);
  EXPECT_NEAR(q.v, std::sqrt(2.0) * 0.25 * 3.0, 1e-15);
  EXPECT_THROW(solve_generation_params(3, 0, 1, 0.25), Error);
  EXPECT_THROW(solve_generation_params(2, 0, 0, 0.25), Error);
}

class Generation : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(Generation, CenterToDimer) {
  const auto [branch, k1p, k2p] = GetParam();
  const double Jp = 0.3;
  const auto p = solve_generation_params(branch, k1p, k2p, Jp);
  oracle::CVec psi = oracle::CVec::Zero(5);
  psi(2) = 1.0;
  psi = oracle::propagate(star_matrix(Jp, 0.0, p.v), psi, p.T);
  EXPECT_GE(oracle::overlap2(pair(5, 0, 1, 1.0), psi), 1.0 - 1e-12);

  for (auto v : {ProtocolVariant::generation, ProtocolVariant::reverse_generation,
                 ProtocolVariant::piecewise_transfer}) {
    EXPECT_GE(run_fidelity(star_generation_schedule(p, v)), 1.0 - 1e-12) << to_string(v);
  }
}

INSTANTIATE_TEST_SUITE_P(Indices, Generation,
                         ::testing::Values(std::tuple{2, 0, 1}, std::tuple{1, 1, 0}, std::tuple{2, 1, 1},
                                           std::tuple{1, 1, 1}, std::tuple{2, 0, 2}));

TEST(Seven, TransferTimes) {
  const auto p = solve_seven_transfer_params(0, 1.0);
  EXPECT_NEAR(p.T, pi / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(solve_seven_transfer_params(-1, 1.0), Error);
}

class SevenTransfer : public ::testing::TestWithParam<int> {};

TEST_P(SevenTransfer, BothVariants) {
  const auto p = solve_seven_transfer_params(GetParam(), 0.7, 0.2);
  const double s3 = std::sqrt(3.0) * 0.7;
  Matrix h = Matrix::Identity(7, 7) * 0.2;
  const std::pair<int, int> edges[] = {{0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {4, 6}};
  const double values[] = {0.7, 0.7, s3, s3, 0.7, 0.7};
  for (int n = 0; n < 6; ++n) h(edges[n].first, edges[n].second) = h(edges[n].second, edges[n].first) = values[n];
  oracle::CVec psi = pair(7, 0, 1, -1.0);
  psi(1) *= -1.0;
  psi = oracle::propagate(h, psi, p.T);
  psi(6) *= -1.0;
  EXPECT_GE(oracle::overlap2(pair(7, 5, 6, -1.0), psi), 1.0 - 1e-12);

  EXPECT_GE(run_fidelity(seven_transfer_schedule(p, ProtocolVariant::phase_flip_transfer)), 1.0 - 1e-12);
  EXPECT_GE(run_fidelity(seven_transfer_schedule(p, ProtocolVariant::hopping_flip_transfer)), 1.0 - 1e-12);
  EXPECT_THROW(seven_transfer_schedule(p, ProtocolVariant::generation), Error);
}

INSTANTIATE_TEST_SUITE_P(Indices, SevenTransfer, ::testing::Values(0, 1, 2));

TEST(Flips, PhaseAndHopping) {
  const StateVector psi = star_state(StarState::initial);
  const StateVector flipped = phase_flip(psi, star::s2);
  EXPECT_NEAR(fidelity(flipped, star_state(StarState::left)), 1.0, 1e-15);
  EXPECT_THROW(phase_flip(psi, 5), Error);
  const auto h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5});
  const auto g = hopping_flip(h, star::coupling(3));
  EXPECT_DOUBLE_EQ(g.base()(star::c, star::s3), -0.25);
  EXPECT_DOUBLE_EQ(g.base()(star::s3, star::c), -0.25);
  EXPECT_THROW(hopping_flip(h, Entry(1, 1)), Error);
}

TEST(BuildSchedule, Dispatch) {
  const auto t = solve_transfer_params(1, 0, 0.25);
  EXPECT_EQ(build_schedule(GraphKind::star, ProtocolVariant::hopping_flip_transfer, t).name,
            "star-hopping-flip-transfer");
  EXPECT_THROW(build_schedule(GraphKind::seven, ProtocolVariant::phase_flip_transfer, t), Error);
  EXPECT_THROW(build_schedule(GraphKind::star, ProtocolVariant::generation, t), Error);
  for (auto v : {ProtocolVariant::phase_flip_transfer, ProtocolVariant::hopping_flip_transfer,
                 ProtocolVariant::generation, ProtocolVariant::reverse_generation,
                 ProtocolVariant::piecewise_transfer}) {
    EXPECT_EQ(protocol_variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(protocol_variant_from_string("teleport"), Error);
}
