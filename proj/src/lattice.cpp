#include "clsnet/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace clsnet {

namespace {

std::size_t arity(Pulse::Kind kind) {
  switch (kind) {
    case Pulse::Kind::constant: return 1;
    case Pulse::Kind::linear_ramp: return 4;
    case Pulse::Kind::crab_star:
    case Pulse::Kind::crab_seven:
    case Pulse::Kind::creation_seven: return 4;
    case Pulse::Kind::creation_star: return 6;
    case Pulse::Kind::custom_table: return 0;
  }
  return 0;
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, std::string(what) + ": non-finite parameter");
  }
}

}  // namespace

Pulse Pulse::constant(double value) { return Pulse(Kind::constant, {value}); }

Pulse Pulse::linear_ramp(double from, double to, double t_start, double t_end) {
  if (!(t_end > t_start)) {
    throw Error(ErrorCode::invalid_argument, "linear ramp needs t_end > t_start");
  }
  return Pulse(Kind::linear_ramp, {from, to, t_start, t_end});
}

Pulse Pulse::crab_star(double floor, double x, double xp, double omega) {
  return Pulse(Kind::crab_star, {floor, x, xp, omega});
}

Pulse Pulse::crab_seven(double floor, double x, double xp, double omega) {
  return Pulse(Kind::crab_seven, {floor, x, xp, omega});
}

Pulse Pulse::creation_star(double amplitude, double horizon, double x, double xp, double omega,
                           double omega_p) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::invalid_argument, "creation pulse needs horizon > 0");
  return Pulse(Kind::creation_star, {amplitude, horizon, x, xp, omega, omega_p});
}

Pulse Pulse::creation_seven(double floor, double x, double xp, double omega) {
  return Pulse(Kind::creation_seven, {floor, x, xp, omega});
}

Pulse Pulse::table(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw Error(ErrorCode::invalid_argument, "pulse table needs matching, non-empty columns");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "pulse table times must increase strictly");
    }
  }
  std::vector<double> params;
  params.reserve(2 * times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    params.push_back(times[i]);
    params.push_back(values[i]);
  }
  return Pulse(Kind::custom_table, std::move(params));
}

Pulse Pulse::from_parts(Kind kind, std::vector<double> params, double gain, double time_sign,
                        double time_shift) {
  require_finite(params, "pulse");
  const std::size_t n = arity(kind);
  if (kind == Kind::custom_table) {
    if (params.empty() || params.size() % 2 != 0) {
      throw Error(ErrorCode::invalid_argument, "custom-table pulse needs (t, value) pairs");
    }
    std::vector<double> times, values;
    for (std::size_t i = 0; i < params.size(); i += 2) {
      times.push_back(params[i]);
      values.push_back(params[i + 1]);
    }
    Pulse p = table(std::move(times), std::move(values));
    p.gain_ = gain;
    p.time_sign_ = time_sign;
    p.time_shift_ = time_shift;
    return p;
  }
  if (params.size() != n) {
    throw Error(ErrorCode::invalid_argument, "pulse '" + to_string(kind) + "' expects " +
                                                 std::to_string(n) + " parameters, got " +
                                                 std::to_string(params.size()));
  }
  if (time_sign != 1.0 && time_sign != -1.0) {
    throw Error(ErrorCode::invalid_argument, "pulse time_sign must be +1 or -1");
  }
  Pulse p(kind, std::move(params));
  if (kind == Kind::linear_ramp && !(p.params_[3] > p.params_[2])) {
    throw Error(ErrorCode::invalid_argument, "linear ramp needs t_end > t_start");
  }
  if (kind == Kind::creation_star && !(p.params_[1] > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "creation pulse needs horizon > 0");
  }
  p.gain_ = gain;
  p.time_sign_ = time_sign;
  p.time_shift_ = time_shift;
  return p;
}

double Pulse::raw(double t) const {
  const auto& p = params_;
  switch (kind_) {
    case Kind::constant:
      return p[0];
    case Kind::linear_ramp: {
      const double from = p[0], to = p[1], t0 = p[2], t1 = p[3];
      if (t <= t0) return from;
      if (t >= t1) return to;
      const double s = (t - t0) / (t1 - t0);
      return from + (to - from) * s;
    }
    case Kind::crab_star:
    case Kind::crab_seven: {
      const double envelope = std::sin(kind_ == Kind::crab_star ? t / 2.0 : t / 4.0);
      const double bracket = p[1] * std::sin(p[3] * t) + p[2] * std::cos(p[3] * t);
      return p[0] * (1.0 + envelope * bracket * bracket);
    }
    case Kind::creation_star: {
      const double amplitude = p[0], horizon = p[1];
      const double modulation = 1.0 + p[2] * std::sin(p[4] * t) + p[3] * std::sin(p[5] * t);
      return modulation * amplitude * (1.0 - t / horizon);
    }
    case Kind::creation_seven: {
      const double bracket = p[1] * std::sin(p[3] * t) + p[2] * std::cos(p[3] * t);
      return p[0] * (1.0 + std::sin(t / 2.0) * bracket);
    }
    case Kind::custom_table: {
      const std::size_t n = p.size() / 2;
      if (t <= p[0]) return p[1];
      if (t >= p[2 * (n - 1)]) return p[2 * (n - 1) + 1];
      std::size_t hi = 1;
      while (p[2 * hi] < t) ++hi;
      const double ta = p[2 * (hi - 1)], va = p[2 * (hi - 1) + 1];
      const double tb = p[2 * hi], vb = p[2 * hi + 1];
      return va + (vb - va) * (t - ta) / (tb - ta);
    }
  }
  return 0.0;
}

double Pulse::operator()(double t) const { return gain_ * raw(time_sign_ * t + time_shift_); }

Pulse Pulse::scaled(double factor) const {
  Pulse p = *this;
  p.gain_ *= factor;
  return p;
}

Pulse Pulse::time_reversed(double horizon) const {
  Pulse p = *this;
  p.time_sign_ = -time_sign_;
  p.time_shift_ = time_sign_ * horizon + time_shift_;
  return p;
}

Pulse Pulse::delayed(double delay) const {
  Pulse p = *this;
  p.time_shift_ = time_shift_ - time_sign_ * delay;
  return p;
}

std::string to_string(Pulse::Kind kind) {
  switch (kind) {
    case Pulse::Kind::constant: return "constant";
    case Pulse::Kind::linear_ramp: return "linear-ramp";
    case Pulse::Kind::crab_star: return "crab-star";
    case Pulse::Kind::crab_seven: return "crab-seven";
    case Pulse::Kind::creation_star: return "creation-star";
    case Pulse::Kind::creation_seven: return "creation-seven";
    case Pulse::Kind::custom_table: return "custom-table";
  }
  return "unknown";
}

Pulse::Kind pulse_kind_from_string(const std::string& name) {
  for (auto k : {Pulse::Kind::constant, Pulse::Kind::linear_ramp, Pulse::Kind::crab_star,
                 Pulse::Kind::crab_seven, Pulse::Kind::creation_star, Pulse::Kind::creation_seven,
                 Pulse::Kind::custom_table}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::invalid_argument, "unknown pulse kind '" + name + "'");
}

// ---------------------------------------------------------------------------

TimedHamiltonian::TimedHamiltonian(Matrix base) : base_(std::move(base)) {
  if (!is_symmetric(base_)) {
    throw Error(ErrorCode::not_hermitian, "Hamiltonian base matrix must be real symmetric and finite");
  }
}

void TimedHamiltonian::check_entry(Entry e) const {
  if (e.col >= dimension()) {
    throw Error(ErrorCode::out_of_range, "entry " + to_string(e) + " outside a " +
                                             std::to_string(dimension()) + "-site Hamiltonian");
  }
}

double TimedHamiltonian::value(Entry e, double t) const {
  check_entry(e);
  if (auto it = pulses_.find(e); it != pulses_.end()) return it->second(t);
  return base_(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
}

Matrix TimedHamiltonian::at(double t) const {
  Matrix m = base_;
  for (const auto& [e, p] : pulses_) {
    const double v = p(t);
    const auto r = static_cast<Eigen::Index>(e.row);
    const auto c = static_cast<Eigen::Index>(e.col);
    m(r, c) = v;
    m(c, r) = v;
  }
  return m;
}

TimedHamiltonian TimedHamiltonian::with_pulse(Entry e, Pulse p) const {
  check_entry(e);
  TimedHamiltonian h = *this;
  h.pulses_.insert_or_assign(e, std::move(p));
  return h;
}

TimedHamiltonian TimedHamiltonian::with_value(Entry e, double value) const {
  check_entry(e);
  if (!std::isfinite(value)) throw Error(ErrorCode::non_finite, "non-finite Hamiltonian entry");
  TimedHamiltonian h = *this;
  h.pulses_.erase(e);
  const auto r = static_cast<Eigen::Index>(e.row);
  const auto c = static_cast<Eigen::Index>(e.col);
  h.base_(r, c) = value;
  h.base_(c, r) = value;
  return h;
}

TimedHamiltonian TimedHamiltonian::with_scaled(Entry e, double factor) const {
  check_entry(e);
  TimedHamiltonian h = *this;
  const auto r = static_cast<Eigen::Index>(e.row);
  const auto c = static_cast<Eigen::Index>(e.col);
  h.base_(r, c) *= factor;
  if (r != c) h.base_(c, r) *= factor;
  if (auto it = h.pulses_.find(e); it != h.pulses_.end()) it->second = it->second.scaled(factor);
  return h;
}

TimedHamiltonian TimedHamiltonian::time_reversed(double horizon) const {
  TimedHamiltonian h = *this;
  for (auto& [e, p] : h.pulses_) p = p.time_reversed(horizon);
  return h;
}

bool operator==(const TimedHamiltonian& a, const TimedHamiltonian& b) {
  return a.base_.rows() == b.base_.rows() && a.base_ == b.base_ && a.pulses_ == b.pulses_;
}

TimedHamiltonian attach_pulse(const TimedHamiltonian& h, Entry entry, const Pulse& p) {
  return h.with_pulse(entry, p);
}

Matrix evaluate_at(const TimedHamiltonian& h, double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::non_finite, "evaluate_at: non-finite time");
  return h.at(t);
}

// ---------------------------------------------------------------------------

Entry star::coupling(int n) {
  switch (n) {
    case 1: return {star::s1, star::c};
    case 2: return {star::s2, star::c};
    case 3: return {star::s3, star::c};
    case 4: return {star::s4, star::c};
    default: throw Error(ErrorCode::out_of_range, "star coupling index must be 1..4");
  }
}

Entry seven::coupling(int n) {
  switch (n) {
    case 1: return {0, 2};
    case 2: return {1, 2};
    case 3: return {2, 3};
    case 4: return {3, 4};
    case 5: return {4, 5};
    case 6: return {4, 6};
    default: throw Error(ErrorCode::out_of_range, "seven-site coupling index must be 1..6");
  }
}

TimedHamiltonian build_star(const std::array<double, 4>& couplings,
                            const std::array<double, 5>& potentials) {
  require_finite(couplings, "build_star");
  require_finite(potentials, "build_star");
  Matrix h = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) h(i, i) = potentials[static_cast<std::size_t>(i)];
  for (int n = 1; n <= 4; ++n) {
    const Entry e = star::coupling(n);
    const auto r = static_cast<Eigen::Index>(e.row), c = static_cast<Eigen::Index>(e.col);
    h(r, c) = h(c, r) = couplings[static_cast<std::size_t>(n - 1)];
  }
  return TimedHamiltonian(std::move(h));
}

TimedHamiltonian build_seven(const std::array<double, 6>& couplings,
                             const std::array<double, 7>& potentials) {
  require_finite(couplings, "build_seven");
  require_finite(potentials, "build_seven");
  Matrix h = Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i) h(i, i) = potentials[static_cast<std::size_t>(i)];
  for (int n = 1; n <= 6; ++n) {
    const Entry e = seven::coupling(n);
    const auto r = static_cast<Eigen::Index>(e.row), c = static_cast<Eigen::Index>(e.col);
    h(r, c) = h(c, r) = couplings[static_cast<std::size_t>(n - 1)];
  }
  return TimedHamiltonian(std::move(h));
}

std::string to_string(const Dimer& d) {
  return "{" + std::to_string(d.first) + "," + std::to_string(d.second) + "}";
}

std::vector<Site> SiteGraph::hubs() const {
  std::vector<Site> out;
  for (Site s = 0; s < labels.size(); ++s) {
    if (labels[s] == SiteRole::hub) out.push_back(s);
  }
  return out;
}

std::vector<Site> SiteGraph::neighbors(Site s) const {
  std::vector<Site> out;
  for (const auto& e : edges) {
    if (e.row == s) out.push_back(e.col);
    if (e.col == s) out.push_back(e.row);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SiteGraph::has_edge(Site a, Site b) const {
  return std::find(edges.begin(), edges.end(), Entry(a, b)) != edges.end();
}

void SiteGraph::validate() const {
  if (labels.size() != n_sites) {
    throw Error(ErrorCode::invalid_argument, "site graph: one label per site required");
  }
  if (!geometry.empty() && geometry.size() != n_sites) {
    throw Error(ErrorCode::invalid_argument, "site graph: geometry must cover every site");
  }
  std::set<Entry> seen;
  for (const auto& e : edges) {
    if (e.diagonal()) throw Error(ErrorCode::invalid_argument, "site graph: self-edge " + to_string(e));
    if (e.col >= n_sites) throw Error(ErrorCode::out_of_range, "site graph: edge " + to_string(e));
    if (!seen.insert(e).second) {
      throw Error(ErrorCode::invalid_argument, "site graph: duplicate edge " + to_string(e));
    }
  }
  std::set<Site> in_dimer;
  for (const auto& d : dimers) {
    if (d.first >= n_sites || d.second >= n_sites || d.first == d.second) {
      throw Error(ErrorCode::invalid_argument, "site graph: malformed dimer " + to_string(d));
    }
    if (!in_dimer.insert(d.first).second || !in_dimer.insert(d.second).second) {
      throw Error(ErrorCode::invalid_argument, "site graph: site shared between dimers");
    }
    if (labels[d.first] != SiteRole::dimer_upper || labels[d.second] != SiteRole::dimer_lower) {
      throw Error(ErrorCode::invalid_argument, "site graph: dimer labels mismatch " + to_string(d));
    }
  }
}

SiteGraph star_graph() {
  SiteGraph g;
  g.n_sites = star::size;
  for (int n = 1; n <= 4; ++n) g.edges.push_back(star::coupling(n));
  g.labels = {SiteRole::dimer_upper, SiteRole::dimer_lower, SiteRole::hub, SiteRole::dimer_upper,
              SiteRole::dimer_lower};
  g.dimers = {{star::s1, star::s2}, {star::s3, star::s4}};
  return g;
}

SiteGraph seven_graph() {
  SiteGraph g;
  g.n_sites = seven::size;
  for (int n = 1; n <= 6; ++n) g.edges.push_back(seven::coupling(n));
  g.labels = {SiteRole::dimer_upper, SiteRole::dimer_lower, SiteRole::hub,      SiteRole::connector,
              SiteRole::hub,         SiteRole::dimer_upper, SiteRole::dimer_lower};
  g.dimers = {{0, 1}, {5, 6}};
  return g;
}

Lattice build_dll(std::size_t cells_x, std::size_t cells_y, double coupling, double potential) {
  if (cells_x < 1 || cells_y < 1) {
    throw Error(ErrorCode::invalid_argument, "decorated Lieb lattice needs at least one cell per axis");
  }
  if (!std::isfinite(coupling) || !std::isfinite(potential)) {
    throw Error(ErrorCode::non_finite, "build_dll: non-finite parameters");
  }
  constexpr std::size_t per_cell = 5;
  const std::size_t n = per_cell * cells_x * cells_y;
  auto hub = [&](std::size_t x, std::size_t y) { return per_cell * (y * cells_x + x); };

  SiteGraph g;
  g.n_sites = n;
  g.labels.resize(n);
  g.geometry.resize(n);
  for (std::size_t y = 0; y < cells_y; ++y) {
    for (std::size_t x = 0; x < cells_x; ++x) {
      const Site h = hub(x, y);
      const Dimer right{h + 1, h + 2};
      const Dimer up{h + 3, h + 4};
      g.labels[h] = SiteRole::hub;
      for (const Dimer& d : {right, up}) {
        g.labels[d.first] = SiteRole::dimer_upper;
        g.labels[d.second] = SiteRole::dimer_lower;
        g.dimers.push_back(d);
        g.edges.emplace_back(h, d.first);
        g.edges.emplace_back(h, d.second);
      }
      if (x + 1 < cells_x) {
        g.edges.emplace_back(hub(x + 1, y), right.first);
        g.edges.emplace_back(hub(x + 1, y), right.second);
      }
      if (y + 1 < cells_y) {
        g.edges.emplace_back(hub(x, y + 1), up.first);
        g.edges.emplace_back(hub(x, y + 1), up.second);
      }
      for (Site s = h; s < h + per_cell; ++s) {
        g.geometry[s] = {static_cast<int>(x), static_cast<int>(y)};
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.validate();

  Matrix m = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) * potential;
  for (const auto& e : g.edges) {
    const auto r = static_cast<Eigen::Index>(e.row), c = static_cast<Eigen::Index>(e.col);
    m(r, c) = m(c, r) = coupling;
  }
  return Lattice{std::move(g), TimedHamiltonian(std::move(m))};
}

}  // namespace clsnet
