#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "coopjump/model.hpp"

namespace coopjump {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Hilbert-space dimension for n three-level atoms.
constexpr int hilbert_dim(int n_atoms) {
  int d = 1;
  for (int i = 0; i < n_atoms; ++i) d *= 3;
  return d;
}

// Single-atom lowering operator for transition j:
//   j=1: |1><2|  (shelf -> ground)
//   j=2: |2><3|  (excited -> shelf)
//   j=3: |1><3|  (excited -> ground)
Eigen::Matrix3cd single_atom_lowering(int j);

// Lowering operator for one atom embedded in the n-atom product space.
// Atom indices are 1-based; atom 1 varies slowest in the product basis,
// i.e. index(x1,x2,x3) = 9*(x1-1) + 3*(x2-1) + (x3-1).
Matrix atom_lowering(int n_atoms, int atom, int j);

// Sum of atom_lowering over all atoms.
Matrix collective_lowering(int n_atoms, int j);

// Non-Hermitian Hamiltonian generating the no-emission evolution
// (hbar = 1, rotating frame, resonant driving):
//   H = sum_j sum_{k,l} (1/2i) G_j(k,l) S_kj^+ S_lj^-  + laser terms,
// where G_j(k,k) = A_j and G_j(k,l) = C_j for k != l.  The laser terms are
// (Omega3/2) sum_k (S_k3^+ + S_k3^-) and, in the V scheme only,
// (Omega2/2) sum_k (S_k1^+ + S_k1^-).
Matrix conditional_hamiltonian(const SystemParams& p);

// One collapse channel of the unravelled master equation.  A detected
// emission applies sqrt(rate) * op to the state.
struct JumpChannel {
  double rate = 0.0;   // decay rate of this channel
  int transition = 0;  // j in {1,2,3}
  int atom = 0;        // 1-based atom index for per-atom channels, 0 for collective
  std::string label;
  Matrix op;           // normalized lowering operator R_k
};

// Channels reproducing the reset operation
//   R(rho) = sum_j [ A_j sum_k S_kj^- rho S_kj^+  +  Re C_j sum_{k!=l} S_kj^- rho S_lj^+ ].
// When Re C_j == 0 the channels are per-atom (S_kj^-, rate A_j), which keeps
// the emitting atom identifiable; otherwise they are the collective
// eigenchannels of the rate matrix A_j I + Re C_j (ones - I).
std::vector<JumpChannel> jump_channels(const SystemParams& p);

// Column-stacking Liouvillian acting on vec(rho):
//   L = -i (I (x) H - conj(H) (x) I) + sum_k rate_k conj(R_k) (x) R_k.
// `strong` contains only the strong-transition dynamics (A3, Omega3, C3);
// `weak` = full - strong holds the slow processes that move population
// between intensity levels (V: the Omega2 laser; D: the A1/A2 decays).
struct LiouvillianParts {
  Matrix full;
  Matrix strong;
  Matrix weak;
};

LiouvillianParts liouvillian(const SystemParams& p);

// The Liouvillian is affine in the strong-transition pair coupling:
//   L(c3) = base + Re(c3) * re_part + Im(c3) * im_part,
// and the same split applies to the strong part alone (the weak part does
// not depend on c3).  Distance sweeps reuse base/re_part/im_part and only
// rescale two matrices per point.
struct StrongCouplingDecomposition {
  Matrix base;
  Matrix re_part;
  Matrix im_part;
  Matrix weak;  // c3-independent; strong(c3) = base - weak + Re*re + Im*im
};

StrongCouplingDecomposition strong_coupling_decomposition(const SystemParams& p);

// Raw binary matrix dump (16-byte header: uint64 rows, uint64 cols, then
// row-major interleaved re/im doubles).  Debugging aid for the CLI.
void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);

}  // namespace coopjump
