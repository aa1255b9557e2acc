#include "clsnet/spectral.hpp"

#include "clsnet/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace clsnet {

namespace {

void require_symmetric(const Matrix& h, const char* who) {
  if (!is_symmetric(h)) {
    throw Error(ErrorCode::not_hermitian, std::string(who) + ": matrix is not real symmetric");
  }
}

void check_permutation(const Permutation& perm, std::size_t n) {
  if (perm.size() != n) {
    throw Error(ErrorCode::invalid_argument, "permutation size does not match the matrix");
  }
  std::vector<bool> hit(n, false);
  for (Site image : perm) {
    if (image >= n || hit[image]) throw Error(ErrorCode::invalid_argument, "permutation is not a bijection");
    hit[image] = true;
  }
}

// Appends every ascending subset of {0..n-1} with `size` elements.
void subsets(std::size_t n, std::size_t size, std::vector<Site>& current, Site start,
             std::vector<std::vector<Site>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (Site s = start; s + (size - current.size()) <= n; ++s) {
    current.push_back(s);
    subsets(n, size, current, s + 1, out);
    current.pop_back();
  }
}

Matrix orthonormal_range(const Matrix& projector) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(projector);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
  }
  Matrix basis(projector.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
  }
  return basis;
}

}  // namespace

Spectrum spectrum(const Matrix& h) {
  require_symmetric(h, "spectrum");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::non_finite, "spectrum: eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<std::pair<std::size_t, std::size_t>> eigenvalue_clusters(const Vector& ascending) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto n = static_cast<std::size_t>(ascending.size());
  std::size_t first = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || ascending(static_cast<Eigen::Index>(i)) - ascending(static_cast<Eigen::Index>(i - 1)) >=
                      degeneracy_gap) {
      if (i > first) out.emplace_back(first, i);
      first = i;
    }
  }
  return out;
}

Matrix permutation_matrix(const Permutation& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    s(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return s;
}

bool commutes_with_permutation(const Matrix& h, const Permutation& perm, double tol) {
  check_permutation(perm, static_cast<std::size_t>(h.rows()));
  const Matrix s = permutation_matrix(perm);
  return (h * s - s * h).cwiseAbs().maxCoeff() <= tol;
}

std::vector<CompactState> find_cls(const Matrix& h, std::size_t max_support,
                                   std::span<const std::vector<Site>> preferred) {
  if (max_support < 1) throw Error(ErrorCode::invalid_argument, "find_cls: max_support must be positive");
  const Spectrum spec = spectrum(h);
  const auto n = static_cast<std::size_t>(h.rows());
  const std::size_t largest = std::min(max_support, n);

  std::vector<std::vector<Site>> candidates;
  for (const auto& p : preferred) {
    std::vector<Site> s = p;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (!s.empty() && s.size() <= largest && s.back() < n) candidates.push_back(std::move(s));
  }
  for (std::size_t size = 1; size <= largest; ++size) {
    std::vector<Site> current;
    subsets(n, size, current, 0, candidates);
  }

  std::vector<CompactState> found;
  for (const auto& [first, last] : eigenvalue_clusters(spec.eigenvalues)) {
    const auto a = static_cast<Eigen::Index>(first);
    const auto d = static_cast<Eigen::Index>(last - first);
    const Matrix basis = spec.eigenvectors.middleCols(a, d);
    const Matrix projector = basis * basis.transpose();

    std::set<Site> used;
    for (const auto& support : candidates) {
      if (std::any_of(support.begin(), support.end(), [&](Site s) { return used.count(s) > 0; })) continue;

      // A vector x supported on S lies in the cluster iff (P - 1) x = 0, i.e.
      // the columns of P - 1 restricted to S are linearly dependent.
      const auto k = static_cast<Eigen::Index>(support.size());
      Matrix restricted(projector.rows(), k);
      for (Eigen::Index j = 0; j < k; ++j) {
        const auto col = static_cast<Eigen::Index>(support[static_cast<std::size_t>(j)]);
        restricted.col(j) = projector.col(col);
        restricted(col, j) -= 1.0;
      }
      Eigen::JacobiSVD<Matrix> svd(restricted, Eigen::ComputeFullV);
      if (svd.singularValues()(k - 1) > degeneracy_gap) continue;
      Vector local = svd.matrixV().col(k - 1);
      if ((local.cwiseAbs().array() <= support_threshold).any()) continue;

      Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
      for (Eigen::Index j = 0; j < k; ++j) x(static_cast<Eigen::Index>(support[static_cast<std::size_t>(j)])) = local(j);
      x.normalize();
      const double energy = x.dot(h * x);
      if ((h * x - energy * x).norm() > support_threshold) continue;
      if (x(static_cast<Eigen::Index>(support.front())) < 0) x = -x;

      found.push_back({StateVector(x.cast<Complex>()), support, energy});
      used.insert(support.begin(), support.end());
    }
  }
  return found;
}

// ---------------------------------------------------------------------------

Vector PartitionBlocks::union_eigenvalues() const {
  Vector all = lifted_eigenvalues();
  std::sort(all.data(), all.data() + all.size());
  return all;
}

Vector PartitionBlocks::lifted_eigenvalues() const {
  std::vector<double> values;
  for (const auto& b : blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) values.push_back(es.eigenvalues()(i));
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix PartitionBlocks::lifted_eigenvectors() const {
  Eigen::Index total = 0, rows = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    total += blocks[k].rows();
    rows = lifts[k].rows();
  }
  Matrix out(rows, total);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(blocks[k]);
    out.middleCols(col, blocks[k].rows()) = lifts[k] * es.eigenvectors();
    col += blocks[k].rows();
  }
  return out;
}

PartitionBlocks equitable_blocks(const Matrix& h, const Permutation& perm) {
  require_symmetric(h, "equitable_blocks");
  if (!commutes_with_permutation(h, perm)) {
    throw Error(ErrorCode::symmetry_violated, "equitable_blocks: permutation does not commute with H");
  }
  const std::size_t n = perm.size();

  // Orbits and the order of the permutation.
  std::vector<std::vector<Site>> orbits;
  std::vector<bool> seen(n, false);
  std::size_t order = 1;
  for (Site s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<Site> orbit;
    for (Site t = s; !seen[t]; t = perm[t]) {
      seen[t] = true;
      orbit.push_back(t);
    }
    order = std::lcm(order, orbit.size());
    orbits.push_back(std::move(orbit));
  }

  PartitionBlocks out;
  Matrix quotient_lift = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(orbits.size()));
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    const double w = 1.0 / std::sqrt(static_cast<double>(orbits[k].size()));
    for (Site s : orbits[k]) quotient_lift(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = w;
  }
  out.names.push_back("sector-0");
  out.blocks.push_back(quotient_lift.transpose() * h * quotient_lift);
  out.lifts.push_back(std::move(quotient_lift));

  const Matrix s = permutation_matrix(perm);
  for (std::size_t k = 1; 2 * k <= order; ++k) {
    Matrix projector = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Matrix power = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < order; ++j) {
      projector += std::cos(2.0 * pi * static_cast<double>(j * k) / static_cast<double>(order)) * power;
      power = s * power;
    }
    projector *= (2 * k == order ? 1.0 : 2.0) / static_cast<double>(order);
    Matrix lift = orthonormal_range(projector);
    if (lift.cols() == 0) continue;
    out.names.push_back("sector-" + std::to_string(k));
    out.blocks.push_back(lift.transpose() * h * lift);
    out.lifts.push_back(std::move(lift));
  }
  return out;
}

Permutation star_cycle() {
  Permutation p(star::size);
  p[star::s1] = star::s2;
  p[star::s2] = star::s3;
  p[star::s3] = star::s4;
  p[star::s4] = star::s1;
  p[star::c] = star::c;
  return p;
}

PartitionBlocks equitable_blocks_star(const Matrix& h) {
  if (h.rows() != static_cast<Eigen::Index>(star::size)) {
    throw Error(ErrorCode::invalid_argument, "equitable_blocks_star: expected a 5x5 matrix");
  }
  return equitable_blocks(h, star_cycle());
}

PartitionBlocks nonequitable_blocks_seven(const Matrix& h7) {
  if (h7.rows() != static_cast<Eigen::Index>(seven::size) || h7.cols() != h7.rows()) {
    throw Error(ErrorCode::invalid_argument, "nonequitable_blocks_seven: expected a 7x7 matrix");
  }
  require_symmetric(h7, "nonequitable_blocks_seven");

  auto coupling = [&](int n) {
    const Entry e = seven::coupling(n);
    return h7(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
  };
  for (Eigen::Index r = 0; r < h7.rows(); ++r) {
    for (Eigen::Index c = r + 1; c < h7.cols(); ++c) {
      bool is_edge = false;
      for (int n = 1; n <= 6; ++n) is_edge = is_edge || seven::coupling(n) == Entry(static_cast<Site>(r), static_cast<Site>(c));
      if (!is_edge && h7(r, c) != 0.0) {
        throw Error(ErrorCode::symmetry_violated, "nonequitable_blocks_seven: coupling outside the seven-site graph");
      }
    }
  }

  const double tol = 1e-12;
  const double j1 = coupling(1), j2 = coupling(2), j3 = coupling(3), j4 = coupling(4);
  const Vector v = h7.diagonal();
  const bool mirrored = std::abs(j1 - coupling(6)) <= tol && std::abs(j2 - coupling(5)) <= tol &&
                        std::abs(v(0) - v(6)) <= tol && std::abs(v(1) - v(5)) <= tol &&
                        std::abs(v(2) - v(4)) <= tol;
  if (!mirrored) {
    throw Error(ErrorCode::symmetry_violated,
                "nonequitable_blocks_seven: halves are not mirror images (J1=J6, J2=J5, v1=v7, v2=v6, v3=v5)");
  }
  const double xi = j3 * j3 + j4 * j4;
  if (!(xi > 0.0)) {
    throw Error(ErrorCode::symmetry_violated, "nonequitable_blocks_seven: J3 and J4 both vanish");
  }
  const double r = std::sqrt(xi);

  Matrix big(4, 4);
  big << v(3), r, 0, 0,
         r, v(2), j2, j1,
         0, j2, v(1), 0,
         0, j1, 0, v(0);
  Matrix small(3, 3);
  small << v(2), j2, j1,
           j2, v(1), 0,
           j1, 0, v(0);

  Matrix big_lift = Matrix::Zero(7, 4);
  big_lift(3, 0) = 1.0;
  Matrix small_lift = Matrix::Zero(7, 3);
  // Column k pairs site (2 - k) of the left half with its mirror site (4 + k).
  for (Eigen::Index k = 0; k < 3; ++k) {
    big_lift(2 - k, k + 1) = j3 / r;
    big_lift(4 + k, k + 1) = j4 / r;
    small_lift(2 - k, k) = j4 / r;
    small_lift(4 + k, k) = -j3 / r;
  }

  PartitionBlocks out;
  out.names = {"R", "C0"};
  out.blocks = {std::move(big), std::move(small)};
  out.lifts = {std::move(big_lift), std::move(small_lift)};
  out.xi = xi;
  return out;
}

}  // namespace clsnet
