#pragma once

#include <span>
#include <string>
#include <vector>

#include "clsnet/core.hpp"

namespace clsnet {

/// Amplitudes at or below this magnitude are treated as exact zeros.
inline constexpr double support_threshold = 1e-10;
/// Eigenvalues closer than this are grouped into one degenerate cluster.
inline constexpr double degeneracy_gap = 1e-9;

struct Spectrum {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns
};

/// Full eigendecomposition of a real symmetric matrix.
Spectrum spectrum(const Matrix& h);

/// Index ranges [first, last) of eigenvalue clusters with gaps < degeneracy_gap.
std::vector<std::pair<std::size_t, std::size_t>> eigenvalue_clusters(const Vector& ascending);

/// perm[i] is the image of site i.
using Permutation = std::vector<Site>;

Matrix permutation_matrix(const Permutation& perm);
bool commutes_with_permutation(const Matrix& h, const Permutation& perm, double tol = 1e-12);

struct CompactState {
  StateVector vector;
  std::vector<Site> support;  // ascending
  double energy = 0.0;
};

/// Eigenvectors of `h` supported on at most `max_support` sites.
///
/// Each degenerate cluster is searched for minimal-support combinations by
/// restricting the cluster projector to candidate supports: `preferred`
/// supports first, then all supports by increasing size in lexicographic
/// order. Accepted supports within one cluster are pairwise disjoint, which
/// yields one orthogonal state per dimer instead of every pairwise difference
/// of twin sites. The first support amplitude is made positive.
std::vector<CompactState> find_cls(const Matrix& h, std::size_t max_support,
                                   std::span<const std::vector<Site>> preferred = {});

/// Reduced blocks whose spectra union to the full spectrum; `lifts[k]` maps
/// block-k coordinates isometrically into site space.
struct PartitionBlocks {
  std::vector<std::string> names;
  std::vector<Matrix> blocks;
  std::vector<Matrix> lifts;
  double xi = 0.0;  // J3^2 + J4^2 for the seven-site decomposition, 0 otherwise

  Vector union_eigenvalues() const;
  /// Block eigenvectors lifted to site space, one column per block eigenpair,
  /// ordered like union_eigenvalues() before sorting.
  Matrix lifted_eigenvectors() const;
  Vector lifted_eigenvalues() const;
};

/// Symmetry-sector decomposition for a permutation commuting with `h`.
/// Sector 0 uses normalized orbit indicators (the quotient of the equitable
/// partition); conjugate Fourier sectors are merged into real blocks.
PartitionBlocks equitable_blocks(const Matrix& h, const Permutation& perm);

/// Star Hamiltonian under the cyclic permutation of its four outer sites.
PartitionBlocks equitable_blocks_star(const Matrix& h);
Permutation star_cycle();

/// Seven-site Hamiltonian split into the 4x4 block R and the 3x3 block C0
/// coupled through sqrt(J3^2 + J4^2). Requires the two halves to mirror each
/// other (J1=J6, J2=J5, v1=v7, v2=v6, v3=v5) and J3^2 + J4^2 > 0.
PartitionBlocks nonequitable_blocks_seven(const Matrix& h7);

}  // namespace clsnet
