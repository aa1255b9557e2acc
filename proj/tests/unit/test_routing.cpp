#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "clsnet/routing.hpp"
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

std::vector<std::pair<std::size_t, std::size_t>> raw_edges(const SiteGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : g.edges) out.emplace_back(e.row, e.col);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> raw_dimers(const SiteGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& d : g.dimers) out.emplace_back(d.first, d.second);
  return out;
}

/// Two stars with no coupling between them.
Lattice two_islands() {
  SiteGraph g;
  g.n_sites = 10;
  for (Site base : {Site{0}, Site{5}}) {
    for (Site k = 1; k <= 4; ++k) g.edges.emplace_back(base, base + k);
    g.labels.push_back(SiteRole::hub);
    g.labels.insert(g.labels.end(), {SiteRole::dimer_upper, SiteRole::dimer_lower, SiteRole::dimer_upper,
                                     SiteRole::dimer_lower});
    g.dimers.push_back({base + 1, base + 2});
    g.dimers.push_back({base + 3, base + 4});
  }
  std::sort(g.edges.begin(), g.edges.end());
  Matrix m = Matrix::Identity(10, 10) * 0.5;
  for (const auto& e : g.edges) m(e.row, e.col) = m(e.col, e.row) = 0.25;
  g.validate();
  return Lattice{g, TimedHamiltonian(m)};
}

}  // namespace

TEST(Stars, ExtractFromLattice) {
  const Lattice lat = build_dll(2, 1, 0.25, 0.5);
  const StarView s = extract_star(lat, 0, {3, 4}, {1, 2});
  EXPECT_EQ(s.sites(), (std::array<Site, 5>{3, 4, 0, 1, 2}));
  EXPECT_EQ(s.internal_entry(1), Entry(0, 3));
  EXPECT_EQ(s.boundary_entries, (std::vector<Entry>{{1, 5}, {2, 5}}));
  const auto pairs = boundary_pairs(lat.graph, s);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (std::pair<Entry, Entry>{{1, 5}, {2, 5}}));
  EXPECT_EQ(hub_dimers(lat.graph, 5), (std::vector<Dimer>{{1, 2}, {6, 7}, {8, 9}}));
  EXPECT_EQ(code_of([&] { extract_star(lat, 1); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { extract_star(lat, 0, {3, 4}, {6, 7}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { s.internal_entry(5); }), ErrorCode::out_of_range);
}

TEST(Plan, HopCountsMatchBfs) {
  const Lattice lat = build_dll(3, 2, 0.25, 0.5);
  const auto& g = lat.graph;
  for (const Dimer& src : g.dimers) {
    const auto dist = oracle::dimer_distances(g.n_sites, raw_edges(g), raw_dimers(g), {src.first, src.second});
    for (const Dimer& dst : g.dimers) {
      const RoutePlan plan = plan_route(lat, src, dst);
      ASSERT_EQ(static_cast<int>(plan.jumps.size()), dist.at({dst.first, dst.second}))
          << to_string(src) << " -> " << to_string(dst);
      Dimer at = src;
      for (const Jump& j : plan.jumps) {
        EXPECT_EQ(j.from, at);
        EXPECT_TRUE(g.has_edge(j.star.center, j.from.first) && g.has_edge(j.star.center, j.from.second));
        EXPECT_TRUE(g.has_edge(j.star.center, j.to.first) && g.has_edge(j.star.center, j.to.second));
        at = j.to;
      }
      EXPECT_EQ(at, dst);
    }
  }
}

TEST(Plan, Errors) {
  const Lattice islands = two_islands();
  EXPECT_EQ(plan_route(islands, {1, 2}, {3, 4}).jumps.size(), 1u);
  EXPECT_EQ(code_of([&] { plan_route(islands, {1, 2}, {6, 7}); }), ErrorCode::no_route);
  EXPECT_EQ(code_of([&] { plan_route(islands, {1, 3}, {6, 7}); }), ErrorCode::invalid_argument);
}

TEST(Ramp, FactorsAndPairs) {
  const Lattice lat = build_dll(2, 1, 0.25, 0.5);
  const StarView s = extract_star(lat, 0, {3, 4}, {1, 2});
  const auto ramp = build_ramp(lat.hamiltonian, s.boundary_entries, RampDirection::down, 2.0,
                               boundary_pairs(lat.graph, s), 1.0);
  EXPECT_DOUBLE_EQ(ramp.factor(0.5), 1.0);
  EXPECT_DOUBLE_EQ(ramp.factor(2.0), 0.5);
  EXPECT_DOUBLE_EQ(ramp.factor(4.0), 0.0);
  EXPECT_DOUBLE_EQ(ramp.value(Entry(1, 5), 0.25, 2.5), 0.0625);
  const auto h = ramp.apply(lat.hamiltonian);
  EXPECT_DOUBLE_EQ(h.value(Entry(1, 5), 2.0), 0.125);
  EXPECT_DOUBLE_EQ(h.value(Entry(2, 5), 2.0), 0.125);
  EXPECT_DOUBLE_EQ(h.value(Entry(0, 1), 2.0), 0.25);

  const auto skew = lat.hamiltonian.with_value(Entry(2, 5), 0.3);
  EXPECT_EQ(code_of([&] {
              build_ramp(skew, s.boundary_entries, RampDirection::down, 1.0, boundary_pairs(lat.graph, s));
            }),
            ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] {
              build_ramp(lat.hamiltonian, {Entry(1, 5)}, RampDirection::down, 1.0, boundary_pairs(lat.graph, s));
            }),
            ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { build_ramp(lat.hamiltonian, s.boundary_entries, RampDirection::up, 0.0, {}); }),
            ErrorCode::invalid_argument);
}

TEST(Schedule, SingleRouteTiming) {
  const Lattice lat = build_dll(3, 3, 0.25, 0.5);
  RouteTiming timing;
  EXPECT_NEAR(timing.transfer_time(0.25), 2 * pi, 1e-14);
  EXPECT_NEAR(timing.jump_duration(0.25), 2 + 2 * pi, 1e-14);
  const auto plan = plan_route(lat, {3, 4}, {26, 27});
  ASSERT_EQ(plan.jumps.size(), 3u);
  const Timeline tl = schedule_multi(lat, {plan}, timing);
  EXPECT_EQ(tl.starts, std::vector<double>{0.0});
  EXPECT_NEAR(tl.makespan(), 3 * (2 + 2 * pi), 1e-12);
  EXPECT_NEAR(tl.jump_start(0, 2), 2 * (2 + 2 * pi), 1e-12);
}

TEST(Schedule, CrossingRoutesWait) {
  const Lattice lat = build_dll(3, 3, 0.25, 0.5);
  const RouteTiming timing;
  const auto a = plan_route(lat, {16, 17}, {26, 27});
  const auto b = plan_route(lat, {8, 9}, {38, 39});
  const Timeline tl = schedule_multi(lat, {a, b}, timing);
  EXPECT_EQ(tl.starts[0], 0.0);
  EXPECT_GT(tl.waits[1], 0.0);
  EXPECT_NO_THROW(tl.verify());
  // no two routes use one hub at overlapping times
  for (const auto& x : tl.reservations) {
    for (const auto& y : tl.reservations) {
      if (x.route == y.route || x.jump == Reservation::npos || y.jump == Reservation::npos) continue;
      if (x.center == y.center) EXPECT_TRUE(x.end <= y.start || y.end <= x.start);
    }
  }
}

TEST(Schedule, SharedDestinationIsUnschedulable) {
  const Lattice lat = build_dll(2, 2, 0.25, 0.5);
  const auto a = plan_route(lat, {1, 2}, {8, 9});
  const auto b = plan_route(lat, {3, 4}, {8, 9});
  EXPECT_EQ(code_of([&] { schedule_multi(lat, {a, b}, RouteTiming{}); }), ErrorCode::unschedulable);
}

TEST(Schedule, VerifyCatchesOverlap) {
  const Lattice lat = build_dll(2, 1, 0.25, 0.5);
  const auto a = plan_route(lat, {3, 4}, {1, 2});
  const auto b = plan_route(lat, {8, 9}, {1, 2});
  Timeline tl = schedule_multi(lat, {a}, RouteTiming{});
  Timeline other = schedule_multi(lat, {b}, RouteTiming{});
  tl.routes.push_back(b);
  tl.starts.push_back(0.0);
  tl.waits.push_back(0.0);
  for (auto r : other.reservations) {
    r.route = 1;
    tl.reservations.push_back(r);
  }
  // both jumps hold dimer (1,2) from t = 0
  EXPECT_EQ(code_of([&] { tl.verify(); }), ErrorCode::schedule_conflict);
}

TEST(Simulate, SingleStarWithoutRampMatchesOracle) {
  const Lattice lat = build_dll(1, 1, 0.25, 0.5);
  RouteTiming timing;
  timing.ramp = 0.0;
  const auto tl = schedule_multi(lat, {plan_route(lat, {1, 2}, {3, 4})}, timing);
  const auto report = simulate_route(lat, tl);
  oracle::CVec psi = oracle::CVec::Zero(5);
  psi(1) = 1 / std::sqrt(2.0);
  psi(2) = -1 / std::sqrt(2.0);
  psi(2) *= -1.0;
  psi = oracle::propagate(lat.hamiltonian.base(), psi, 2 * pi);
  psi(4) *= -1.0;
  EXPECT_LE((report.final_states[0].amplitudes() - psi).norm(), 1e-11);
  EXPECT_GE(report.fidelities[0], 1.0 - 1e-12);
}

TEST(Simulate, RampedJumpMatchesRk4) {
  const Lattice lat = build_dll(2, 1, 0.25, 0.5);
  const RouteTiming timing;  // ramp 1, phase flips
  const auto tl = schedule_multi(lat, {plan_route(lat, {3, 4}, {1, 2})}, timing);
  const auto report = simulate_route(lat, tl);

  const Matrix base = lat.hamiltonian.base();
  auto ramped = [&](double factor) {
    Matrix m = base;
    m(1, 5) = m(5, 1) = m(2, 5) = m(5, 2) = 0.25 * factor;
    return m;
  };
  const double T = 2 * pi;
  oracle::CVec psi = oracle::CVec::Zero(10);
  psi(3) = 1 / std::sqrt(2.0);
  psi(4) = -1 / std::sqrt(2.0);
  psi = oracle::rk4([&](double t) { return ramped(1.0 - t); }, psi, 0.0, 1.0, 4000);
  psi(4) *= -1.0;  // star site 2 of the jump
  psi = oracle::propagate(ramped(0.0), psi, T);
  psi(2) *= -1.0;  // star site 4
  psi = oracle::rk4([&](double t) { return ramped(t - 1.0 - T); }, psi, 1.0 + T, 2.0 + T, 4000);

  EXPECT_LE((report.final_states[0].amplitudes() - psi).norm(), 1e-9);
  EXPECT_GE(report.fidelities[0], 1.0 - 1e-8);
  ASSERT_EQ(report.jumps.size(), 1u);
  EXPECT_NEAR(report.jumps[0].end, 2 + T, 1e-12);
  EXPECT_LE(report.norm_drift, 1e-10);
}

TEST(Simulate, StaggeredRampMatchesRk4) {
  const Lattice lat = build_dll(2, 2, 0.25, 0.5);
  RouteTiming timing;
  timing.stagger = true;
  const auto plan = plan_route(lat, {11, 12}, {16, 17});
  ASSERT_EQ(plan.jumps.size(), 1u);
  const StarView& star = plan.jumps[0].star;
  EXPECT_EQ(star.center, 15u);
  const auto tl = schedule_multi(lat, {plan}, timing);
  EXPECT_NEAR(tl.makespan(), 4 + 2 * pi, 1e-12);
  const auto report = simulate_route(lat, tl);

  // hub 15 also holds (8, 9) and (18, 19); dimer (11, 12) couples to hub 10
  const std::set<Entry> paired{{10, 11}, {10, 12}};
  const std::set<Entry> others{{8, 15}, {9, 15}, {15, 18}, {15, 19}};
  std::set<Entry> boundary(star.boundary_entries.begin(), star.boundary_entries.end());
  std::set<Entry> expected = paired;
  expected.insert(others.begin(), others.end());
  ASSERT_EQ(boundary, expected);

  const Matrix base = lat.hamiltonian.base();
  auto ramped = [&](double fp, double fo) {
    Matrix m = base;
    for (const Entry& e : star.boundary_entries) {
      const double f = paired.count(e) ? fp : fo;
      m(e.row, e.col) = m(e.col, e.row) = base(e.row, e.col) * f;
    }
    return m;
  };
  const double T = 2 * pi;
  const auto sites = star.sites();
  oracle::CVec psi = oracle::CVec::Zero(base.rows());
  psi(11) = 1 / std::sqrt(2.0);
  psi(12) = -1 / std::sqrt(2.0);
  psi = oracle::rk4([&](double t) { return ramped(1.0, 1.0 - t); }, psi, 0.0, 1.0, 4000);
  psi = oracle::rk4([&](double t) { return ramped(2.0 - t, 0.0); }, psi, 1.0, 2.0, 4000);
  psi(sites[1]) *= -1.0;
  psi = oracle::propagate(ramped(0.0, 0.0), psi, T);
  psi(sites[4]) *= -1.0;
  psi = oracle::rk4([&](double t) { return ramped(t - 2.0 - T, 0.0); }, psi, 2.0 + T, 3.0 + T, 4000);
  psi = oracle::rk4([&](double t) { return ramped(1.0, t - 3.0 - T); }, psi, 3.0 + T, 4.0 + T, 4000);

  EXPECT_LE((report.final_states[0].amplitudes() - psi).norm(), 1e-9);
  EXPECT_GE(report.fidelities[0], 1.0 - 1e-8);
  EXPECT_NEAR(report.jumps[0].end, 4 + T, 1e-12);
}

TEST(Simulate, MultiJumpAndHoppingProtocol) {
  const Lattice lat = build_dll(2, 2, 0.25, 0.5);
  RouteTiming timing;
  timing.protocol = JumpProtocol::hopping_flip;
  const auto plan = plan_route(lat, {3, 4}, {16, 17});
  ASSERT_EQ(plan.jumps.size(), 2u);
  const auto report = simulate_route(lat, schedule_multi(lat, {plan}, timing));
  EXPECT_GE(report.fidelities[0], 1.0 - 1e-8);
  ASSERT_EQ(report.jumps.size(), 2u);
  for (const auto& j : report.jumps) EXPECT_GE(j.fidelity, 1.0 - 1e-8);
}

TEST(Simulate, JumpSchedule) {
  RouteTiming timing;
  timing.k2 = 1;
  const auto s = jump_schedule(timing, 0.25, 0.5);
  EXPECT_NEAR(s.duration, 6 * pi, 1e-13);
  EXPECT_EQ(code_of([&] { timing.transfer_time(0.0); }), ErrorCode::invalid_argument);
}
