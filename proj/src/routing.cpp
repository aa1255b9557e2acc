#include "clsnet/routing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <tuple>

namespace clsnet {

namespace {

double entry_value(const Matrix& m, Entry e) {
  return m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
}

void set_entry(Matrix& m, Entry e, double value) {
  const auto r = static_cast<Eigen::Index>(e.row), c = static_cast<Eigen::Index>(e.col);
  m(r, c) = value;
  m(c, r) = value;
}

bool is_dimer(const SiteGraph& g, Dimer d) {
  return std::find(g.dimers.begin(), g.dimers.end(), d) != g.dimers.end();
}

bool touches(const SiteGraph& g, Site hub, Dimer d) { return g.has_edge(hub, d.first) && g.has_edge(hub, d.second); }

std::vector<Site> dimer_hubs(const SiteGraph& g, Dimer d) {
  std::vector<Site> out;
  for (Site h : g.hubs()) {
    if (touches(g, h, d)) out.push_back(h);
  }
  return out;
}

bool overlaps(double a0, double a1, double b0, double b1) { return a0 < a1 && b0 < b1 && a0 < b1 && b0 < a1; }

bool share_site(const std::vector<Site>& a, const std::vector<Site>& b) {
  for (Site s : a) {
    if (std::find(b.begin(), b.end(), s) != b.end()) return true;
  }
  return false;
}

std::vector<Site> dimer_sites(Dimer d) { return {d.first, d.second}; }

double star_coupling(const Lattice& lattice, const StarView& star) {
  const Matrix& b = lattice.hamiltonian.base();
  const double j = entry_value(b, star.internal_entry(1));
  for (int n = 2; n <= 4; ++n) {
    if (std::abs(entry_value(b, star.internal_entry(n)) - j) > 1e-12) {
      throw Error(ErrorCode::invalid_argument, "star at hub " + std::to_string(star.center) +
                                                   " has unequal couplings; the transfer needs a uniform star");
    }
  }
  const auto sites = star.sites();
  const double v = b(static_cast<Eigen::Index>(star.center), static_cast<Eigen::Index>(star.center));
  for (Site s : sites) {
    if (std::abs(b(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) - v) > 1e-12) {
      throw Error(ErrorCode::invalid_argument, "star at hub " + std::to_string(star.center) +
                                                   " has unequal potentials; the transfer needs a uniform star");
    }
  }
  return j;
}

}  // namespace

std::array<Site, 5> StarView::sites() const {
  return {dimer_in.first, dimer_in.second, center, dimer_out.first, dimer_out.second};
}

Entry StarView::internal_entry(int n) const {
  switch (n) {
    case 1: return {dimer_in.first, center};
    case 2: return {dimer_in.second, center};
    case 3: return {dimer_out.first, center};
    case 4: return {dimer_out.second, center};
  }
  throw Error(ErrorCode::out_of_range, "star coupling index must be 1..4");
}

std::vector<Dimer> hub_dimers(const SiteGraph& graph, Site hub) {
  std::vector<Dimer> out;
  for (const Dimer& d : graph.dimers) {
    if (touches(graph, hub, d)) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StarView extract_star(const Lattice& lattice, Site center, Dimer dimer_in, Dimer dimer_out) {
  const SiteGraph& g = lattice.graph;
  if (center >= g.n_sites || g.labels[center] != SiteRole::hub) {
    throw Error(ErrorCode::invalid_argument, "site " + std::to_string(center) + " is not a hub");
  }
  if (hub_dimers(g, center).size() < 2) {
    throw Error(ErrorCode::invalid_argument, "hub " + std::to_string(center) + " has fewer than two dimers");
  }
  if (!is_dimer(g, dimer_in) || !is_dimer(g, dimer_out) || dimer_in == dimer_out) {
    throw Error(ErrorCode::invalid_argument, "star needs two distinct dimers of the lattice");
  }
  if (!touches(g, center, dimer_in) || !touches(g, center, dimer_out)) {
    throw Error(ErrorCode::invalid_argument, "dimer does not couple to hub " + std::to_string(center));
  }
  StarView star{center, dimer_in, dimer_out, {}};
  const auto sites = star.sites();
  auto inside = [&](Site s) { return std::find(sites.begin(), sites.end(), s) != sites.end(); };
  for (const Entry& e : g.edges) {
    if (inside(e.row) != inside(e.col)) star.boundary_entries.push_back(e);
  }
  std::sort(star.boundary_entries.begin(), star.boundary_entries.end());
  return star;
}

StarView extract_star(const Lattice& lattice, Site center) {
  if (center >= lattice.graph.n_sites || lattice.graph.labels[center] != SiteRole::hub) {
    throw Error(ErrorCode::invalid_argument, "site " + std::to_string(center) + " is not a hub");
  }
  const auto dimers = hub_dimers(lattice.graph, center);
  if (dimers.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "hub " + std::to_string(center) + " has fewer than two dimers");
  }
  return extract_star(lattice, center, dimers[0], dimers[1]);
}

std::vector<std::pair<Entry, Entry>> boundary_pairs(const SiteGraph& graph, const StarView& star) {
  std::vector<std::pair<Entry, Entry>> out;
  std::set<Entry> boundary(star.boundary_entries.begin(), star.boundary_entries.end());
  for (const Dimer& d : graph.dimers) {
    for (Site h : graph.hubs()) {
      const Entry a(h, d.first), b(h, d.second);
      if (boundary.count(a) && boundary.count(b)) out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double RampSegment::factor(double t) const {
  double s = duration > 0.0 ? (t - t_start) / duration : (t >= t_start ? 1.0 : 0.0);
  s = std::clamp(s, 0.0, 1.0);
  return direction == RampDirection::down ? 1.0 - s : s;
}

double RampSegment::value(Entry e, double base, double t) const {
  return std::find(entries.begin(), entries.end(), e) != entries.end() ? base * factor(t) : base;
}

TimedHamiltonian RampSegment::apply(const TimedHamiltonian& h) const {
  TimedHamiltonian out = h;
  const double t1 = t_start + duration;
  for (const Entry& e : entries) {
    const double base = entry_value(h.base(), e);
    const double from = direction == RampDirection::down ? base : 0.0;
    const double to = direction == RampDirection::down ? 0.0 : base;
    out = out.with_pulse(e, Pulse::linear_ramp(from, to, t_start, t1));
  }
  return out;
}

RampSegment build_ramp(const TimedHamiltonian& h, std::vector<Entry> entries, RampDirection direction,
                       double duration, std::vector<std::pair<Entry, Entry>> paired, double t_start) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::invalid_argument, "ramp duration must be positive");
  }
  std::sort(entries.begin(), entries.end());
  for (const Entry& e : entries) {
    if (e.col >= h.dimension()) throw Error(ErrorCode::out_of_range, "ramp entry " + to_string(e) + " out of range");
  }
  for (const auto& [a, b] : paired) {
    const bool has_a = std::binary_search(entries.begin(), entries.end(), a);
    const bool has_b = std::binary_search(entries.begin(), entries.end(), b);
    if (!has_a || !has_b) {
      throw Error(ErrorCode::invalid_argument, "ramp pair (" + to_string(a) + ", " + to_string(b) +
                                                   ") references an entry that is not ramped");
    }
    if (entry_value(h.base(), a) != entry_value(h.base(), b)) {
      throw Error(ErrorCode::invalid_argument,
                  "ramp pair (" + to_string(a) + ", " + to_string(b) + ") has unequal base values");
    }
  }
  return RampSegment{t_start, duration, direction, std::move(entries), std::move(paired)};
}

RoutePlan plan_route(const Lattice& lattice, Dimer source, Dimer destination) {
  const SiteGraph& g = lattice.graph;
  if (!is_dimer(g, source) || !is_dimer(g, destination)) {
    throw Error(ErrorCode::invalid_argument, "route endpoints must be dimers of the lattice");
  }
  RoutePlan plan{source, destination, {}};
  if (source == destination) return plan;

  std::map<Dimer, std::vector<Site>> hubs_of;
  for (const Dimer& d : g.dimers) hubs_of[d] = dimer_hubs(g, d);
  std::map<Site, std::vector<Dimer>> dimers_of;
  for (Site h : g.hubs()) dimers_of[h] = hub_dimers(g, h);

  std::map<Dimer, std::size_t> dist{{destination, 0}};
  std::deque<Dimer> queue{destination};
  while (!queue.empty()) {
    const Dimer d = queue.front();
    queue.pop_front();
    for (Site h : hubs_of[d]) {
      for (const Dimer& n : dimers_of[h]) {
        if (dist.emplace(n, dist[d] + 1).second) queue.push_back(n);
      }
    }
  }
  if (!dist.count(source)) {
    throw Error(ErrorCode::no_route, "no dimer-jump path from " + to_string(source) + " to " + to_string(destination));
  }

  Dimer current = source;
  while (!(current == destination)) {
    bool moved = false;
    for (Site h : hubs_of[current]) {
      for (const Dimer& n : dimers_of[h]) {
        auto it = dist.find(n);
        if (it == dist.end() || it->second + 1 != dist[current]) continue;
        plan.jumps.push_back({extract_star(lattice, h, current, n), current, n});
        current = n;
        moved = true;
        break;
      }
      if (moved) break;
    }
  }
  return plan;
}

double RouteTiming::transfer_time(double coupling) const {
  if (!(coupling > 0.0)) throw Error(ErrorCode::invalid_argument, "routing needs a positive lattice coupling");
  if (k2 < 0) throw Error(ErrorCode::invalid_argument, "transfer index k2 must be non-negative");
  return pi * (1.0 + 2.0 * k2) / (2.0 * coupling);
}

double Timeline::jump_start(std::size_t route, std::size_t jump) const {
  const double duration = timing.jump_duration(coupling);
  return starts.at(route) + static_cast<double>(jump) * duration;
}

double Timeline::makespan() const {
  double end = 0.0;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    end = std::max(end, jump_start(r, routes[r].jumps.size()));
  }
  return end;
}

void Timeline::verify() const {
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& jumps = routes[r].jumps;
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      const Dimer expected = k == 0 ? routes[r].source : jumps[k - 1].to;
      if (!(jumps[k].from == expected)) {
        throw Error(ErrorCode::schedule_conflict, "route " + std::to_string(r) + " jumps do not chain");
      }
    }
    if (!jumps.empty() && !(jumps.back().to == routes[r].destination)) {
      throw Error(ErrorCode::schedule_conflict, "route " + std::to_string(r) + " does not end at its destination");
    }
  }
  for (std::size_t i = 0; i < reservations.size(); ++i) {
    for (std::size_t j = i + 1; j < reservations.size(); ++j) {
      const auto& a = reservations[i];
      const auto& b = reservations[j];
      if (a.route == b.route) continue;
      if (overlaps(a.start, a.end, b.start, b.end) && share_site(a.sites, b.sites)) {
        throw Error(ErrorCode::schedule_conflict,
                    "routes " + std::to_string(a.route) + " and " + std::to_string(b.route) +
                        " hold a common site during [" + std::to_string(std::max(a.start, b.start)) + ", " +
                        std::to_string(std::min(a.end, b.end)) + ")");
      }
    }
  }
}

Timeline schedule_multi(const Lattice& lattice, const std::vector<RoutePlan>& routes, const RouteTiming& timing) {
  Timeline tl;
  tl.routes = routes;
  tl.timing = timing;
  tl.coupling = 0.0;
  for (const auto& r : routes) {
    for (const auto& j : r.jumps) {
      const double c = star_coupling(lattice, j.star);
      if (tl.coupling == 0.0) tl.coupling = c;
      if (std::abs(c - tl.coupling) > 1e-12) {
        throw Error(ErrorCode::invalid_argument, "routing needs one coupling value for every star");
      }
    }
  }
  if (tl.coupling == 0.0) {
    const auto& edges = lattice.graph.edges;
    tl.coupling = edges.empty() ? 1.0 : std::abs(entry_value(lattice.hamiltonian.base(), edges.front()));
  }
  if (!(timing.ramp >= 0.0)) throw Error(ErrorCode::invalid_argument, "ramp duration must be non-negative");
  const double duration = timing.jump_duration(tl.coupling);

  auto route_reservations = [&](std::size_t r, double start) {
    std::vector<Reservation> out;
    const RoutePlan& plan = routes[r];
    if (plan.jumps.empty()) {
      out.push_back({r, Reservation::npos, 0.0, forever, dimer_sites(plan.source), 0});
      return out;
    }
    if (start > 0.0) out.push_back({r, Reservation::npos, 0.0, start, dimer_sites(plan.source), 0});
    for (std::size_t k = 0; k < plan.jumps.size(); ++k) {
      const auto sites = plan.jumps[k].star.sites();
      const double s = start + static_cast<double>(k) * duration;
      out.push_back({r, k, s, s + duration, std::vector<Site>(sites.begin(), sites.end()), plan.jumps[k].star.center});
    }
    const double end = start + static_cast<double>(plan.jumps.size()) * duration;
    out.push_back({r, Reservation::npos, end, forever, dimer_sites(plan.destination), 0});
    return out;
  };

  for (std::size_t r = 0; r < routes.size(); ++r) {
    std::vector<Reservation> blocking = tl.reservations;
    for (std::size_t later = r + 1; later < routes.size(); ++later) {
      blocking.push_back({later, Reservation::npos, 0.0, forever, dimer_sites(routes[later].source), 0});
    }
    std::vector<double> candidates{0.0};
    for (const auto& b : blocking) {
      if (!std::isfinite(b.end)) continue;
      for (std::size_t k = 0; k <= routes[r].jumps.size(); ++k) {
        const double c = b.end - static_cast<double>(k) * duration;
        if (c > 0.0) candidates.push_back(c);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    bool placed = false;
    for (double start : candidates) {
      const auto mine = route_reservations(r, start);
      bool clash = false;
      for (const auto& a : mine) {
        for (const auto& b : blocking) {
          if (overlaps(a.start, a.end, b.start, b.end) && share_site(a.sites, b.sites)) {
            clash = true;
            break;
          }
        }
        if (clash) break;
      }
      if (!clash) {
        tl.starts.push_back(start);
        tl.waits.push_back(start);
        tl.reservations.insert(tl.reservations.end(), mine.begin(), mine.end());
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::unschedulable,
                  "route " + std::to_string(r) + " from " + to_string(routes[r].source) + " to " +
                      to_string(routes[r].destination) +
                      " crosses a dimer that another route occupies indefinitely (its source or destination)");
    }
  }
  tl.verify();
  return tl;
}

StateVector dimer_state(std::size_t dimension, Dimer d) {
  if (d.first >= dimension || d.second >= dimension) throw Error(ErrorCode::out_of_range, "dimer outside the lattice");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dimension));
  v(static_cast<Eigen::Index>(d.first)) = 1.0 / std::sqrt(2.0);
  v(static_cast<Eigen::Index>(d.second)) = -1.0 / std::sqrt(2.0);
  return StateVector(std::move(v));
}

ProtocolSchedule jump_schedule(const RouteTiming& timing, double coupling, double potential) {
  TransferParams p;
  p.J = coupling;
  p.v = potential;
  p.k2 = timing.k2;
  p.T = timing.transfer_time(coupling);
  return star_transfer_schedule(p, timing.protocol == JumpProtocol::phase_flip
                                       ? ProtocolVariant::phase_flip_transfer
                                       : ProtocolVariant::hopping_flip_transfer);
}

RouteReport simulate_route(const Lattice& lattice, const Timeline& timeline, const EvolveOptions& options) {
  timeline.verify();
  const Matrix& base = lattice.hamiltonian.base();
  if (!lattice.hamiltonian.is_static()) {
    throw Error(ErrorCode::invalid_argument, "routing expects a static lattice Hamiltonian");
  }
  const std::size_t dim = lattice.hamiltonian.dimension();
  const double ramp = timeline.timing.ramp;
  const double lead = timeline.timing.lead();
  const double transfer = timeline.timing.transfer_time(timeline.coupling);

  struct Window {
    std::size_t route, jump;
    const Jump* jump_ref;
    double start;
    std::vector<Entry> paired;  // boundary couplings of the star's dimers
    std::vector<Entry> others;  // hub couplings to the other dimers
    FlattenedSchedule star;
    std::array<Site, 5> sites;
  };
  std::vector<Window> windows;
  std::vector<std::pair<double, Site>> flips;
  std::set<double> marks{0.0};
  for (std::size_t r = 0; r < timeline.routes.size(); ++r) {
    const auto& plan = timeline.routes[r];
    for (std::size_t k = 0; k < plan.jumps.size(); ++k) {
      const Jump& j = plan.jumps[k];
      const double v = base(static_cast<Eigen::Index>(j.star.center), static_cast<Eigen::Index>(j.star.center));
      const auto pairs = boundary_pairs(lattice.graph, j.star);
      Window w{r, k, &j, timeline.jump_start(r, k), {}, {},
               flatten(jump_schedule(timeline.timing, star_coupling(lattice, j.star), v)), j.star.sites()};
      for (const Entry& e : j.star.boundary_entries) {
        const bool at_hub = e.row == j.star.center || e.col == j.star.center;
        (at_hub ? w.others : w.paired).push_back(e);
      }
      if (ramp > 0.0) build_ramp(lattice.hamiltonian, j.star.boundary_entries, RampDirection::down, ramp, pairs);
      const double t_on = w.start + lead;
      for (const auto& [t, site] : w.star.phase_flips) flips.emplace_back(t_on + t, w.sites[site]);
      for (const auto& seg : w.star.segments) {
        marks.insert(t_on + seg.t0);
        marks.insert(t_on + seg.t1);
      }
      marks.insert(w.start);
      marks.insert(w.start + ramp);
      marks.insert(t_on + transfer + ramp);
      marks.insert(w.start + 2.0 * lead + transfer);
      windows.push_back(std::move(w));
    }
  }
  std::stable_sort(flips.begin(), flips.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  // Lattice Hamiltonian at time t; `mid` selects the phase of every window so
  // that interval endpoints are evaluated with the interval's own pieces.
  auto hamiltonian = [&](double t, double mid, bool* ramping) {
    Matrix m = base;
    for (const Window& w : windows) {
      const double t_on = w.start + lead;
      const double t_off = t_on + transfer;
      if (mid < w.start || mid > t_off + lead) continue;
      // the paired group ramps right next to the transfer, the others
      // at the outer edges of the window (the same interval unless staggered)
      auto factor = [&](double down_start, double up_start) {
        if (mid < t_on) return 1.0 - std::clamp((t - down_start) / ramp, 0.0, 1.0);
        if (mid > t_off) return std::clamp((t - up_start) / ramp, 0.0, 1.0);
        return 0.0;
      };
      if (ramping && (mid < t_on || mid > t_off)) *ramping = true;
      const double fp = factor(t_on - ramp, t_off);
      const double fo = factor(w.start, t_off + lead - ramp);
      for (const Entry& e : w.paired) set_entry(m, e, entry_value(m, e) * fp);
      for (const Entry& e : w.others) set_entry(m, e, entry_value(m, e) * fo);
      if (mid >= t_on && mid <= t_off) {
        const double local_mid = mid - t_on;
        const ScheduleSegment* seg = &w.star.segments.front();
        for (const auto& s : w.star.segments) {
          if (local_mid >= s.t0 && local_mid <= s.t1) seg = &s;
        }
        const Matrix star = seg->hamiltonian.at(t - t_on - seg->origin);
        for (Eigen::Index a = 0; a < 5; ++a) {
          for (Eigen::Index b = a; b < 5; ++b) {
            if (a != b && star(a, b) == 0.0 && !lattice.graph.has_edge(w.sites[a], w.sites[b])) continue;
            set_entry(m, Entry(w.sites[a], w.sites[b]), star(a, b));
          }
        }
      }
    }
    return m;
  };

  RouteReport report;
  std::vector<CVector> psi;
  for (const auto& plan : timeline.routes) psi.push_back(dimer_state(dim, plan.source).amplitudes());

  std::size_t next_flip = 0;
  auto apply_flips = [&](double until) {
    while (next_flip < flips.size() && flips[next_flip].first <= until) {
      for (auto& p : psi) p(static_cast<Eigen::Index>(flips[next_flip].second)) *= -1.0;
      ++next_flip;
    }
  };

  std::vector<double> times(marks.begin(), marks.end());
  apply_flips(0.0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double a = times[i], b = times[i + 1];
    const double mid = 0.5 * (a + b);
    bool ramping = false;
    const Matrix at_mid = hamiltonian(mid, mid, &ramping);
    for (auto& p : psi) {
      StateVector s(p);
      if (ramping) {
        s = evolve_timedep([&](double t) { return hamiltonian(t, mid, nullptr); }, s, a, b, options);
      } else {
        s = evolve_static(at_mid, s, b - a);
      }
      p = s.amplitudes();
      report.norm_drift = std::max(report.norm_drift, std::abs(p.norm() - 1.0));
    }
    apply_flips(b);
    for (const Window& w : windows) {
      const double end = w.start + 2.0 * lead + transfer;
      if (end == b) {
        report.jumps.push_back({w.route, w.jump, w.jump_ref->star.center, w.start, end,
                                fidelity(StateVector(psi[w.route]), dimer_state(dim, w.jump_ref->to))});
      }
    }
  }
  report.duration = times.back();
  std::sort(report.jumps.begin(), report.jumps.end(), [](const JumpReport& x, const JumpReport& y) {
    return std::tie(x.route, x.jump) < std::tie(y.route, y.jump);
  });
  for (std::size_t r = 0; r < psi.size(); ++r) {
    report.final_states.emplace_back(psi[r]);
    report.fidelities.push_back(fidelity(report.final_states.back(), dimer_state(dim, timeline.routes[r].destination)));
  }
  return report;
}

}  // namespace clsnet
