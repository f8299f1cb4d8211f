#pragma once

#include <string>
#include <vector>

#include "coopjump/operators.hpp"

namespace coopjump {

// Intensity level of a product state = number of atoms NOT in the shelf
// level |2>.  result[i] holds the sorted product-basis indices of level i.
std::vector<std::vector<int>> intensity_subspaces(int n_atoms);

// Projector onto the span of the product states at one intensity level.
Matrix level_projector(int n_atoms, int level);

// Unitary implementing an atom permutation on the product space.
// perm is 0-based: atom k is sent to position perm[k].
Matrix permutation_operator(int n_atoms, const std::vector<int>& perm);

std::vector<std::vector<int>> all_permutations(int n_atoms);

// Group average (1/n!) sum_g P_g rho P_g^dagger.
Matrix symmetrize_density(const Matrix& rho, int n_atoms);

// Permutation-adapted orthonormal basis for three three-level atoms.
// Columns of u are grouped by intensity level and labelled by how they
// transform: 's' = invariant, 'a' = sign representation, 'p' = member of a
// two-dimensional pair.  All coefficients are real.
struct AdaptedState {
  std::string label;
  int level = 0;
  char irrep = 's';
  int pair_id = -1;  // pairs share an id; -1 for s/a states
};

// Canonically aligned two-dimensional pair: every pair transforms with the
// same 2x2 matrices (swap of atoms 2,3 = diag(1,-1), cyclic = rotation by
// -2pi/3), so pair-pair contractions below are basis-independent.
struct IrrepPair {
  int level = 0;
  Vector f1, f2;  // 27-dim canonical components
};

struct DickeBasis {
  Matrix u;  // 27 x 27
  std::vector<AdaptedState> states;
  std::vector<IrrepPair> pairs;
  std::vector<std::vector<int>> sym_cols;  // per level: columns with irrep 's'
  std::vector<std::vector<int>> ant_cols;  // per level: columns with irrep 'a'
  std::vector<std::vector<int>> pair_ids;  // per level: indices into pairs
};

DickeBasis dicke_basis();

// Isotypic components of a density-matrix block R_ij (rows supported on
// level i, columns on level j) under simultaneous atom permutation:
//   symmetric:     |s_a><s_b|, |a_a><a_b|, (|f1><g1| + |f2><g2|)/sqrt2
//   antisymmetric: |s><a|, |a><s|,          (|f1><g2| - |f2><g1|)/sqrt2
//   mixed:         everything else (transforms in the 2-dim representation)
enum class Sector { symmetric, antisymmetric, mixed };

struct SectorBasis {
  int row_level = 0;
  int col_level = 0;
  Sector sector = Sector::symmetric;
  Matrix basis;  // 729 x d, orthonormal columns in vec space
};

SectorBasis sector_basis(const DickeBasis& db, int row_level, int col_level, Sector s);

// target^dagger * op * source on the vectorized space.
Matrix project_between(const Matrix& op, const SectorBasis& target, const SectorBasis& source);

// Reduction of an operator that maps the sector into itself; throws
// NumericalError(solver) if op leaks out of the sector by more than
// invariance_tol * |op * basis|.
Matrix reduce_operator(const Matrix& op, const SectorBasis& basis, double invariance_tol = 1e-10);

// Component of v orthogonal to the span of basis.basis, relative to |v|.
double leakage(const Vector& v, const SectorBasis& basis);

// Human-readable table of sector dimensions for every block.
std::string sector_table(const DickeBasis& db);

}  // namespace coopjump
