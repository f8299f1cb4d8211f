#include "coopjump/operators.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "coopjump/errors.hpp"

namespace coopjump {

namespace {

Matrix identity(int d) { return Matrix::Identity(d, d); }

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// -i (I (x) H) + i (conj(H) (x) I) for the column-stacked commutator part
// of d rho / dt = -i (H rho - rho H^dagger).  H is not assumed Hermitian.
Matrix coherent_superop(const Matrix& h) {
  const int d = static_cast<int>(h.rows());
  const Complex i(0.0, 1.0);
  return -i * kron(identity(d), h) + i * kron(h.conjugate(), identity(d));
}

// sum_j [ A_j sum_k S_kj rho S_kj^+ + Re C_j sum_{k != l} S_kj rho S_lj^+ ]
// vectorized.  Built directly from the rate matrix so it stays affine in
// Re C_j even where the channel decomposition would go negative.
Matrix reset_superop(const SystemParams& p) {
  const int d = hilbert_dim(p.n_atoms);
  Matrix out = Matrix::Zero(d * d, d * d);
  const double re_c[3] = {p.c1.real(), p.c2.real(), p.c3.real()};
  const double a[3] = {p.a1, p.a2, p.a3};
  for (int j = 1; j <= 3; ++j) {
    if (a[j - 1] == 0.0 && re_c[j - 1] == 0.0) continue;
    std::vector<Matrix> s;
    for (int k = 1; k <= p.n_atoms; ++k) s.push_back(atom_lowering(p.n_atoms, k, j));
    for (int k = 0; k < p.n_atoms; ++k)
      for (int l = 0; l < p.n_atoms; ++l) {
        const double g = (k == l) ? a[j - 1] : re_c[j - 1];
        if (g == 0.0) continue;
        // vec(S_k rho S_l^dag) = (conj(S_l) (x) S_k) vec(rho)
        out += g * kron(s[l].conjugate(), s[k]);
      }
  }
  return out;
}

SystemParams strong_only(SystemParams p) {
  p.omega2 = 0.0;
  p.a1 = 0.0;
  p.a2 = 0.0;
  p.c1 = Complex(0, 0);
  p.c2 = Complex(0, 0);
  return p;
}

}  // namespace

Eigen::Matrix3cd single_atom_lowering(int j) {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  switch (j) {
    case 1: m(0, 1) = 1.0; break;  // |1><2|
    case 2: m(1, 2) = 1.0; break;  // |2><3|
    case 3: m(0, 2) = 1.0; break;  // |1><3|
    default: throw ParameterError("transition index must be 1, 2 or 3");
  }
  return m;
}

Matrix atom_lowering(int n_atoms, int atom, int j) {
  if (n_atoms < 1 || n_atoms > 3) throw ParameterError("n_atoms must be 1, 2 or 3");
  if (atom < 1 || atom > n_atoms) throw ParameterError("atom index out of range");
  Matrix out = Matrix::Identity(1, 1);
  const Matrix m = single_atom_lowering(j);
  for (int k = 1; k <= n_atoms; ++k)
    out = kron(out, k == atom ? m : identity(3));
  return out;
}

Matrix collective_lowering(int n_atoms, int j) {
  const int d = hilbert_dim(n_atoms);
  Matrix out = Matrix::Zero(d, d);
  for (int k = 1; k <= n_atoms; ++k) out += atom_lowering(n_atoms, k, j);
  return out;
}

Matrix conditional_hamiltonian(const SystemParams& p) {
  const int n = p.n_atoms;
  const int d = hilbert_dim(n);
  Matrix h = Matrix::Zero(d, d);
  const Complex half_over_i(0.0, -0.5);  // 1/(2i)
  const Complex c[3] = {p.c1, p.c2, p.c3};
  const double a[3] = {p.a1, p.a2, p.a3};
  for (int j = 1; j <= 3; ++j) {
    if (a[j - 1] == 0.0 && c[j - 1] == Complex(0, 0)) continue;
    std::vector<Matrix> s;
    for (int k = 1; k <= n; ++k) s.push_back(atom_lowering(n, k, j));
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        const Complex g = (k == l) ? Complex(a[j - 1], 0.0) : c[j - 1];
        if (g == Complex(0, 0)) continue;
        h += half_over_i * g * (s[k].adjoint() * s[l]);
      }
  }
  if (p.omega3 != 0.0) {
    const Matrix s3 = collective_lowering(n, 3);
    h += 0.5 * p.omega3 * (s3 + Matrix(s3.adjoint()));
  }
  if (p.scheme == LevelScheme::V && p.omega2 != 0.0) {
    // The weak laser couples the ground level to the shelf, i.e. the j=1
    // operator family.
    const Matrix s1 = collective_lowering(n, 1);
    h += 0.5 * p.omega2 * (s1 + Matrix(s1.adjoint()));
  }
  return h;
}

std::vector<JumpChannel> jump_channels(const SystemParams& p) {
  const int n = p.n_atoms;
  std::vector<JumpChannel> out;
  const Complex c[3] = {p.c1, p.c2, p.c3};
  const double a[3] = {p.a1, p.a2, p.a3};
  auto push = [&](double rate, int j, int atom, std::string label, Matrix op) {
    if (rate == 0.0) return;
    if (rate < 0.0) {
      std::ostringstream os;
      os << "collective channel '" << label << "' has negative rate " << rate;
      throw UnphysicalConfigError(os.str());
    }
    out.push_back(JumpChannel{rate, j, atom, std::move(label), std::move(op)});
  };
  for (int j = 1; j <= 3; ++j) {
    const double aj = a[j - 1];
    const double re = c[j - 1].real();
    if (aj == 0.0 && re == 0.0) continue;
    std::vector<Matrix> s;
    for (int k = 1; k <= n; ++k) s.push_back(atom_lowering(n, k, j));
    const std::string tj = "A" + std::to_string(j);
    if (re == 0.0 || n == 1) {
      for (int k = 1; k <= n; ++k)
        push(aj, j, k, tj + " atom " + std::to_string(k), s[k - 1]);
    } else if (n == 2) {
      push(aj + re, j, 0, tj + " sym", (s[0] + s[1]) / std::sqrt(2.0));
      push(aj - re, j, 0, tj + " antisym", (s[0] - s[1]) / std::sqrt(2.0));
    } else {
      push(aj + 2.0 * re, j, 0, tj + " sym", (s[0] + s[1] + s[2]) / std::sqrt(3.0));
      push(aj - re, j, 0, tj + " pair a", (2.0 * s[0] - s[1] - s[2]) / std::sqrt(6.0));
      push(aj - re, j, 0, tj + " pair b", (s[1] - s[2]) / std::sqrt(2.0));
    }
  }
  return out;
}

LiouvillianParts liouvillian(const SystemParams& p) {
  const SystemParams ps = strong_only(p);
  LiouvillianParts parts;
  parts.full = coherent_superop(conditional_hamiltonian(p)) + reset_superop(p);
  parts.strong = coherent_superop(conditional_hamiltonian(ps)) + reset_superop(ps);
  parts.weak = parts.full - parts.strong;
  return parts;
}

StrongCouplingDecomposition strong_coupling_decomposition(const SystemParams& p) {
  SystemParams p0 = p;
  p0.c3 = Complex(0, 0);
  SystemParams pre = p;
  pre.c3 = Complex(1, 0);
  SystemParams pim = p;
  pim.c3 = Complex(0, 1);

  StrongCouplingDecomposition d;
  const LiouvillianParts at0 = liouvillian(p0);
  d.base = at0.full;
  d.weak = at0.weak;
  d.re_part = liouvillian(pre).full - at0.full;
  d.im_part = liouvillian(pim).full - at0.full;
  return d;
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c) {
      const double re = m(static_cast<int>(r), static_cast<int>(c)).real();
      const double im = m(static_cast<int>(r), static_cast<int>(c)).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows > (1u << 20) || cols > (1u << 20))
    throw ConfigError("malformed matrix file '" + path + "'");
  Matrix m(static_cast<int>(rows), static_cast<int>(cols));
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      m(static_cast<int>(r), static_cast<int>(c)) = Complex(re, im);
    }
  if (!in) throw ConfigError("truncated matrix file '" + path + "'");
  return m;
}

}  // namespace coopjump
