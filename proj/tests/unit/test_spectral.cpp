#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "clsnet/lattice.hpp"
#include "clsnet/spectral.hpp"
#include "oracles.hpp"

using namespace clsnet;

namespace {

Vector sorted(Vector v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

/// Eigen's general complex solver; it ignores the symmetry the library relies on.
Vector reference_eigenvalues(const Matrix& h) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h.cast<Complex>());
  Vector ev(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ev(i) = es.eigenvalues()(i).real();
  return sorted(ev);
}

void check_cls(const Matrix& h, const std::vector<CompactState>& states, std::size_t max_support) {
  for (const auto& s : states) {
    const CVector& v = s.vector.amplitudes();
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_LE((h.cast<Complex>() * v - s.energy * v).norm(), 1e-10);
    EXPECT_LE(s.support.size(), max_support);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const bool in = std::binary_search(s.support.begin(), s.support.end(), static_cast<Site>(i));
      if (!in) EXPECT_LE(std::abs(v(i)), support_threshold);
      if (in) EXPECT_GT(std::abs(v(i)), support_threshold);
    }
  }
  for (std::size_t a = 0; a < states.size(); ++a) {
    for (std::size_t b = a + 1; b < states.size(); ++b) {
      EXPECT_LE(std::abs(states[a].vector.amplitudes().dot(states[b].vector.amplitudes())), 1e-10);
    }
  }
}

}  // namespace

TEST(Spectrum, UniformStarClosedForm) {
  const double J = 0.25, v = 0.5;
  const auto h = build_star({J, J, J, J}, {v, v, v, v, v}).base();
  const Spectrum s = spectrum(h);
  // three dark states at v, bright pair at v +- 2J
  const double expected[] = {v - 2 * J, v, v, v, v + 2 * J};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s.eigenvalues(i), expected[i], 1e-14);
  EXPECT_LE((s.eigenvectors.transpose() * s.eigenvectors - Matrix::Identity(5, 5)).norm(), 1e-13);
  EXPECT_LE((h * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal()).norm(), 1e-13);
}

TEST(Spectrum, MatchesGenericSolverOnRandomMatrices) {
  std::mt19937_64 rng(7);
  for (int n : {2, 5, 7, 12}) {
    const Matrix h = oracle::random_symmetric(n, rng);
    EXPECT_LE((spectrum(h).eigenvalues - reference_eigenvalues(h)).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(Spectrum, RejectsNonSymmetric) {
  Matrix h = Matrix::Identity(3, 3);
  h(0, 2) = 1.0;
  EXPECT_THROW(spectrum(h), Error);
}

TEST(Clusters, GroupsDegenerateValues) {
  Vector v(6);
  v << 0.0, 1.0, 1.0 + 1e-12, 1.0 + 2e-12, 2.0, 2.0 + 1e-6;
  const auto c = eigenvalue_clusters(v);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[1], (std::pair<std::size_t, std::size_t>{1, 4}));
  EXPECT_EQ(c[3], (std::pair<std::size_t, std::size_t>{5, 6}));
}

TEST(Cls, StarHasTwoDimerStates) {
  const auto h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5}).base();
  const auto cls = find_cls(h, 2);
  ASSERT_EQ(cls.size(), 2u);
  check_cls(h, cls, 2);
  EXPECT_EQ(cls[0].support, (std::vector<Site>{star::s1, star::s2}));
  EXPECT_EQ(cls[1].support, (std::vector<Site>{star::s3, star::s4}));
  for (const auto& s : cls) {
    EXPECT_NEAR(s.energy, 0.5, 1e-12);
    EXPECT_NEAR(s.vector[s.support[0]].real(), 1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(s.vector[s.support[1]].real(), -1 / std::sqrt(2.0), 1e-12);
  }
}

TEST(Cls, UnequalCouplingsTiltTheDimerState) {
  const auto h = build_star({0.25, 0.3, 0.25, 0.35}, {0.5, 0.5, 0.5, 0.5, 0.5}).base();
  const auto cls = find_cls(h, 2);
  ASSERT_EQ(cls.size(), 2u);
  check_cls(h, cls, 2);
  // amplitudes proportional to (J2, -J1) cancel on the center
  EXPECT_NEAR(cls[0].vector[star::s2].real() / cls[0].vector[star::s1].real(), -0.25 / 0.3, 1e-12);
  EXPECT_NEAR(cls[1].vector[star::s4].real() / cls[1].vector[star::s3].real(), -0.25 / 0.35, 1e-12);
}

TEST(Cls, NoneWhenOnsiteEnergiesDiffer) {
  const auto h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.6, 0.0, 0.7, 0.8}).base();
  EXPECT_TRUE(find_cls(h, 2).empty());
}

class DllCls : public ::testing::TestWithParam<int> {};

TEST_P(DllCls, OnePerDimer) {
  const int n = GetParam();
  const Lattice lat = build_dll(n, n, 0.25, 0.5);
  const Matrix& h = lat.hamiltonian.base();
  const auto cls = find_cls(h, 2);
  EXPECT_EQ(cls.size(), static_cast<std::size_t>(2 * n * n));
  check_cls(h, cls, 2);
  std::set<std::vector<Site>> supports;
  for (const auto& s : cls) supports.insert(s.support);
  for (const Dimer& d : lat.graph.dimers) EXPECT_TRUE(supports.count({d.first, d.second}));
}

INSTANTIATE_TEST_SUITE_P(Patches, DllCls, ::testing::Values(1, 2, 3));

TEST(Cls, PreferredSupportsComeFirst) {
  const auto h = build_star({0.25, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.5}).base();
  const std::vector<std::vector<Site>> preferred{{star::s3, star::s4}};
  const auto cls = find_cls(h, 2, preferred);
  ASSERT_EQ(cls.size(), 2u);
  EXPECT_EQ(cls[0].support, (std::vector<Site>{star::s3, star::s4}));
}

TEST(Permutations, StarCycleCommutesOnlyWhenUniform) {
  const auto uniform = build_star({0.3, 0.3, 0.3, 0.3}, {0.1, 0.1, 0.7, 0.1, 0.1}).base();
  const auto skew = build_star({0.3, 0.3, 0.3, 0.4}, {0.1, 0.1, 0.7, 0.1, 0.1}).base();
  EXPECT_TRUE(commutes_with_permutation(uniform, star_cycle()));
  EXPECT_FALSE(commutes_with_permutation(skew, star_cycle()));
  const Matrix p = permutation_matrix(star_cycle());
  EXPECT_LE((p.transpose() * p - Matrix::Identity(5, 5)).norm(), 0.0);
}

TEST(Partition, StarBlocksReproduceSpectrum) {
  const auto h = build_star({0.3, 0.3, 0.3, 0.3}, {0.2, 0.2, -0.4, 0.2, 0.2}).base();
  const PartitionBlocks b = equitable_blocks_star(h);
  EXPECT_EQ(b.names.front(), "sector-0");
  EXPECT_EQ(b.blocks.front().rows(), 2);
  EXPECT_LE((sorted(b.union_eigenvalues()) - reference_eigenvalues(h)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix vecs = b.lifted_eigenvectors();
  const Vector vals = b.lifted_eigenvalues();
  EXPECT_LE((h * vecs - vecs * vals.asDiagonal()).norm(), 1e-12);
  EXPECT_LE((vecs.transpose() * vecs - Matrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(Partition, GenericPermutationOnDll) {
  // mirror x <-> y of a square patch: swaps each cell's right and up dimers
  const Lattice lat = build_dll(2, 2, 0.25, 0.5);
  Permutation perm(lat.graph.n_sites);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      const Site h = 5 * (y * 2 + x), m = 5 * (x * 2 + y);
      perm[h] = m;
      perm[h + 1] = m + 3;
      perm[h + 2] = m + 4;
      perm[h + 3] = m + 1;
      perm[h + 4] = m + 2;
    }
  }
  const Matrix& h = lat.hamiltonian.base();
  ASSERT_TRUE(commutes_with_permutation(h, perm));
  const PartitionBlocks b = equitable_blocks(h, perm);
  EXPECT_LE((sorted(b.union_eigenvalues()) - reference_eigenvalues(h)).cwiseAbs().maxCoeff(), 1e-11);
  const Matrix vecs = b.lifted_eigenvectors();
  EXPECT_LE((h * vecs - vecs * b.lifted_eigenvalues().asDiagonal()).norm(), 1e-11);
}

TEST(Partition, SevenSiteBlocks) {
  const double J = 1.0, s3 = std::sqrt(3.0);
  const auto h = build_seven({J, J, s3, s3, J, J}, {0, 0, 0, 0, 0, 0, 0}).base();
  const PartitionBlocks b = nonequitable_blocks_seven(h);
  ASSERT_EQ(b.names, (std::vector<std::string>{"R", "C0"}));
  EXPECT_EQ(b.blocks[0].rows(), 4);
  EXPECT_EQ(b.blocks[1].rows(), 3);
  EXPECT_NEAR(b.xi, 6.0, 1e-12);
  EXPECT_LE((sorted(b.union_eigenvalues()) - reference_eigenvalues(h)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix vecs = b.lifted_eigenvectors();
  EXPECT_LE((h * vecs - vecs * b.lifted_eigenvalues().asDiagonal()).norm(), 1e-12);
}

TEST(Partition, SevenSiteNeedsMirrorSymmetry) {
  const auto h = build_seven({1.0, 1.0, 1.0, 1.0, 1.0, 1.2}, {0, 0, 0, 0, 0, 0, 0}).base();
  try {
    nonequitable_blocks_seven(h);
    ADD_FAILURE() << "expected symmetry_violated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::symmetry_violated);
  }
}

TEST(Partition, RandomMirrorSymmetricSevenSite) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double j1 = u(rng), j2 = u(rng), j3 = u(rng), j4 = u(rng);
    const double v1 = u(rng), v2 = u(rng), v3 = u(rng), v4 = u(rng);
    const auto h = build_seven({j1, j2, j3, j4, j2, j1}, {v1, v2, v3, v4, v3, v2, v1}).base();
    const PartitionBlocks b = nonequitable_blocks_seven(h);
    EXPECT_NEAR(b.xi, j3 * j3 + j4 * j4, 1e-12);
    EXPECT_LE((sorted(b.union_eigenvalues()) - reference_eigenvalues(h)).cwiseAbs().maxCoeff(), 1e-11);
  }
}
