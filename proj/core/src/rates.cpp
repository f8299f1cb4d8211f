#include "coopjump/rates.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "coopjump/errors.hpp"
#include "coopjump/linalg.hpp"

namespace coopjump {

namespace {

double scale_of(const SystemParams& p) {
  if (p.a3 > 0.0) return p.a3;
  if (p.omega3 > 0.0) return p.omega3;
  return 1.0;
}

SystemParams scaled_params(SystemParams p, double s) {
  p.a1 /= s;
  p.a2 /= s;
  p.a3 /= s;
  p.omega2 /= s;
  p.omega3 /= s;
  p.c1 /= s;
  p.c2 /= s;
  p.c3 /= s;
  return p;
}

[[noreturn]] void degeneracy_error(const std::string& what, int dim) {
  std::ostringstream os;
  os << what << ": expected a one-dimensional space, got dimension " << dim;
  throw NumericalError(NumericalError::Kind::degeneracy, os.str());
}

// Fixes the arbitrary overall phase of a matrix that is Hermitian up to a
// phase, returning the Hermitian representative with the larger norm.
Matrix hermitian_representative(const Matrix& m) {
  const Matrix h = hermitize(m);
  const Matrix ah = hermitize(Complex(0.0, -1.0) * m);
  return h.norm() >= ah.norm() ? h : ah;
}

Matrix trace_normalized(Matrix rho, const std::string& what) {
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-10 * rho.norm())
    throw NumericalError(NumericalError::Kind::degeneracy,
                         what + ": candidate state is traceless");
  return rho / tr;
}

// ---------------------------------------------------------------------------
// Full product-basis route (any atom number; validates the reduced route).
// ---------------------------------------------------------------------------

std::vector<int> block_indices(const std::vector<std::vector<int>>& levels, int d,
                               int row_level, int col_level) {
  std::vector<int> out;
  for (int y : levels[col_level])
    for (int x : levels[row_level]) out.push_back(y * d + x);
  return out;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<int>(r), static_cast<int>(c)) = m(rows[r], cols[c]);
  return out;
}

Vector subvector(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<int>(k)) = v(idx[k]);
  return out;
}

void scatter_add(Vector& v, const std::vector<int>& idx, const Vector& vals) {
  for (std::size_t k = 0; k < idx.size(); ++k) v(idx[k]) += vals(static_cast<int>(k));
}

// Null candidates of one diagonal block, symmetrized over atom permutations
// and collapsed to the (required unique) invariant direction.
Matrix symmetrized_block_null(const Matrix& block_null, const std::vector<int>& idx,
                              int n_atoms, int d, const std::string& what) {
  if (block_null.cols() == 0) degeneracy_error(what, 0);
  Matrix stacked(d * d, block_null.cols());
  for (int k = 0; k < block_null.cols(); ++k) {
    Vector full = Vector::Zero(d * d);
    scatter_add(full, idx, block_null.col(k));
    const Matrix sym = symmetrize_density(unvec(full, d), n_atoms);
    stacked.col(k) = vec(sym);
  }
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-8 * sv(0)) ++rank;
  if (rank != 1) degeneracy_error(what + " (after symmetrization)", rank);
  return hermitian_representative(unvec(svd.matrixU().col(0), d));
}

QuasisteadyState full_quasisteady(const SystemParams& ps, const Matrix& l0, int level) {
  const int n = ps.n_atoms;
  const int d = hilbert_dim(n);
  const auto levels = intensity_subspaces(n);
  const auto idx = block_indices(levels, d, level, level);
  const Matrix block = submatrix(l0, idx, idx);
  const Matrix nulls = null_space(block, 1e-10);
  Matrix rho = symmetrized_block_null(nulls, idx, n, d,
                                      "steady state of intensity level " + std::to_string(level));
  rho = trace_normalized(rho, "quasisteady state");
  QuasisteadyState out;
  out.level = level;
  out.rho = rho;
  out.residual = (l0 * vec(rho)).norm() / (l0.norm() * vec(rho).norm());
  return out;
}

std::vector<Matrix> full_dual_directions(const SystemParams& ps, const Matrix& l0) {
  const int n = ps.n_atoms;
  const int d = hilbert_dim(n);
  const auto levels = intensity_subspaces(n);
  std::vector<Matrix> out;
  for (int level = 0; level <= n; ++level) {
    const auto idx = block_indices(levels, d, level, level);
    const Matrix block = submatrix(l0, idx, idx);
    const Matrix left = null_space(block.adjoint(), 1e-10);
    out.push_back(symmetrized_block_null(
        left, idx, n, d, "dual state of intensity level " + std::to_string(level)));
  }
  return out;
}

// Biorthonormalize duals against states: Tr(dual_j^dag rho_i) = delta_ij.
std::vector<Matrix> biorthonormalize(const std::vector<Matrix>& duals,
                                     const std::vector<Matrix>& states) {
  const int m = static_cast<int>(duals.size());
  Matrix gram(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) gram(a, b) = vec(duals[a]).dot(vec(states[b]));
  if (std::abs(gram.determinant()) < 1e-12)
    throw NumericalError(NumericalError::Kind::degeneracy,
                         "dual/state Gram matrix is singular");
  const Matrix ginv = gram.inverse();
  std::vector<Matrix> out;
  for (int j = 0; j < m; ++j) {
    Matrix dj = Matrix::Zero(duals[0].rows(), duals[0].cols());
    for (int k = 0; k < m; ++k) dj += std::conj(ginv(j, k)) * duals[k];
    out.push_back(std::move(dj));
  }
  return out;
}

double level_trace(const Matrix& m, const std::vector<int>& level_states) {
  Complex tr = 0.0;
  for (int x : level_states) tr += m(x, x);
  return tr.real();
}

RateSet full_rates(const SystemParams& phys) {
  const double s = scale_of(phys);
  const SystemParams ps = scaled_params(phys, s);
  const int n = ps.n_atoms;
  const int d = hilbert_dim(n);
  const auto levels = intensity_subspaces(n);
  const LiouvillianParts lp = liouvillian(ps);

  RateSet rs;
  rs.n_levels = n + 1;

  std::vector<QuasisteadyState> qs;
  for (int i = 0; i <= n; ++i) qs.push_back(full_quasisteady(ps, lp.strong, i));

  auto adjacent_blocks = [&](int i) {
    std::vector<std::pair<int, int>> blocks;
    for (int other : {i - 1, i + 1}) {
      if (other < 0 || other > n) continue;
      blocks.emplace_back(other, i);
      blocks.emplace_back(i, other);
    }
    return blocks;
  };

  if (ps.scheme == LevelScheme::V) {
    for (int i = 0; i <= n; ++i) {
      const Vector rhs = lp.weak * vec(qs[i].rho);
      Vector rho1 = Vector::Zero(d * d);
      Vector uncaptured = rhs;
      for (const auto& [r, c] : adjacent_blocks(i)) {
        const auto idx = block_indices(levels, d, r, c);
        const Matrix block = submatrix(lp.strong, idx, idx);
        const Vector b = subvector(rhs, idx);
        const Vector x = pseudo_solve(block, -b, 1e-10, 1e-8);
        scatter_add(rho1, idx, x);
        for (int k : idx) uncaptured(k) = 0.0;
      }
      if (rhs.norm() > 0.0 && uncaptured.norm() > 1e-8 * rhs.norm())
        throw NumericalError(NumericalError::Kind::solver,
                             "weak drive leaves the adjacent coherence blocks");
      const Matrix flow = unvec(lp.full * (vec(qs[i].rho) + rho1), d);
      for (int j = 0; j <= n; ++j)
        if (j != i) rs.p(i, j) = level_trace(flow, levels[j]) * s;
    }
    return rs;
  }

  // D scheme: first order in the weak decays via the dual states.
  std::vector<Matrix> states;
  for (const auto& q : qs) states.push_back(q.rho);
  const std::vector<Matrix> duals =
      biorthonormalize(full_dual_directions(ps, lp.strong), states);

  double worst_resolvent = 0.0;
  for (int i = 0; i <= n; ++i) {
    const Vector lrho = lp.weak * vec(qs[i].rho);
    std::vector<double> alpha(n + 1);
    for (int j = 0; j <= n; ++j) {
      alpha[j] = vec(duals[j]).dot(lrho).real();
      if (j != i) rs.p(i, j) = alpha[j] * s;
    }
    // Norm of the fast-relaxing correction the rate formula drops:
    // solve L0 y = L1 rho_ss,i - sum_j alpha_ij rho_ss,j blockwise.  The
    // subtraction can cancel exactly (at c3 = 0 a weak jump maps one
    // quasisteady state onto the next), so the right-hand side is judged
    // against the pre-cancellation scale.
    Vector tilde = lrho;
    for (int j = 0; j <= n; ++j) tilde -= alpha[j] * vec(qs[j].rho);
    double norm2 = 0.0;
    for (int j = std::max(0, i - 1); j <= std::min(n, i + 1); ++j) {
      const auto idx = block_indices(levels, d, j, j);
      const Vector c = subvector(tilde, idx);
      const double ref = subvector(lrho, idx).norm() +
                         std::abs(alpha[j]) * vec(qs[j].rho).norm();
      if (c.norm() <= 1e-12 * ref) continue;
      const Matrix block = submatrix(lp.strong, idx, idx);
      const Vector y =
          pseudo_solve(block, Vector(-c), 1e-10,
                       std::max(1e-8, 1e-8 * ref / c.norm()));
      norm2 += y.squaredNorm();
    }
    worst_resolvent = std::max(worst_resolvent, std::sqrt(norm2));
  }
  rs.resolvent_norm = worst_resolvent;
  return rs;
}

// ---------------------------------------------------------------------------
// Symmetry-reduced route (three atoms): all solves live in the symmetric
// isotypic sectors, and the Liouvillian's affine dependence on c3 lets a
// sweep reuse every reduction.
// ---------------------------------------------------------------------------

struct ReducedEngine {
  SystemParams phys;
  double scale = 1.0;
  LevelScheme scheme = LevelScheme::V;
  DickeBasis db;

  // full(c3) = base + Re(c3/scale) re + Im(c3/scale) im;  strong = full - weak
  Matrix l_base, l_re, l_im, l_weak;

  struct Red {
    Matrix base, re, im;
    Matrix at(Complex c3s) const { return base + c3s.real() * re + c3s.imag() * im; }
  };

  std::array<SectorBasis, 4> diag;
  std::array<Red, 4> diag_strong;
  std::array<RealVector, 4> trace_row;  // Re vec(I)^T diag basis (real columns)

  // coherence sectors: up[k] = block (k, k+1), down[k] = block (k+1, k)
  std::array<SectorBasis, 3> up, down;
  std::array<Red, 3> up_strong, down_strong;

  // V scheme: weak maps diag[src] -> coherence sector, and trace functionals
  // g[j] = vec(P_j)^dag L_weak restricted to a coherence sector.
  struct CoherenceMaps {
    Matrix from_lo, from_hi;           // sources diag[k], diag[k+1]
    std::array<Eigen::RowVectorXcd, 4> g;
  };
  std::array<CoherenceMaps, 3> up_maps, down_maps;

  // D scheme: weak maps diag[i] -> diag[j] for |i-j| <= 1 (j index, i index)
  Matrix diag_weak[4][4];

  explicit ReducedEngine(const SystemParams& base_params) : phys(base_params) {
    if (phys.n_atoms != 3)
      throw ParameterError("the symmetry-reduced solver requires 3 atoms");
    scale = scale_of(phys);
    scheme = phys.scheme;
    const SystemParams ps = scaled_params(phys, scale);
    db = dicke_basis();

    const StrongCouplingDecomposition dec = strong_coupling_decomposition(ps);
    l_base = dec.base;
    l_re = dec.re_part;
    l_im = dec.im_part;
    l_weak = dec.weak;
    const Matrix strong0 = l_base - l_weak;

    std::array<Eigen::RowVectorXcd, 4> proj_rows;  // vec(P_j)^dag L_weak
    for (int j = 0; j <= 3; ++j)
      proj_rows[j] = vec(level_projector(3, j)).adjoint() * l_weak;

    for (int i = 0; i <= 3; ++i) {
      diag[i] = sector_basis(db, i, i, Sector::symmetric);
      diag_strong[i] =
          Red{reduce_operator(strong0, diag[i]), reduce_operator(l_re, diag[i]),
              reduce_operator(l_im, diag[i])};
      trace_row[i] = (vec(Matrix::Identity(27, 27)).adjoint() * diag[i].basis).real();
    }
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; j <= 3; ++j)
        if (std::abs(i - j) <= 1)
          diag_weak[j][i] = project_between(l_weak, diag[j], diag[i]);
    for (int k = 0; k < 3; ++k) {
      up[k] = sector_basis(db, k, k + 1, Sector::symmetric);
      down[k] = sector_basis(db, k + 1, k, Sector::symmetric);
      up_strong[k] = Red{reduce_operator(strong0, up[k]), reduce_operator(l_re, up[k]),
                         reduce_operator(l_im, up[k])};
      down_strong[k] = Red{reduce_operator(strong0, down[k]),
                           reduce_operator(l_re, down[k]),
                           reduce_operator(l_im, down[k])};
      up_maps[k].from_lo = project_between(l_weak, up[k], diag[k]);
      up_maps[k].from_hi = project_between(l_weak, up[k], diag[k + 1]);
      down_maps[k].from_lo = project_between(l_weak, down[k], diag[k]);
      down_maps[k].from_hi = project_between(l_weak, down[k], diag[k + 1]);
      for (int j = 0; j <= 3; ++j) {
        up_maps[k].g[j] = proj_rows[j] * up[k].basis;
        down_maps[k].g[j] = proj_rows[j] * down[k].basis;
      }
    }
  }

  Vector reduced_null(const Matrix& m, const std::string& what) const {
    const Matrix ns = null_space(m, 1e-10);
    if (ns.cols() != 1) degeneracy_error(what, static_cast<int>(ns.cols()));
    return ns.col(0);
  }

  // Trace-normalized steady state of level i in reduced coordinates.
  Vector steady(Complex c3s, int i) const {
    Vector v = reduced_null(diag_strong[i].at(c3s),
                            "steady state of intensity level " + std::to_string(i));
    Complex trace = 0.0;
    for (int k = 0; k < v.size(); ++k) trace += trace_row[i](k) * v(k);
    if (std::abs(trace) < 1e-10 * v.norm())
      throw NumericalError(NumericalError::Kind::degeneracy,
                           "quasisteady state: candidate state is traceless");
    return v / trace;
  }

  QuasisteadyState quasisteady(Complex c3_phys, int i) const {
    const Complex c3s = c3_phys / scale;
    const Vector v = steady(c3s, i);
    QuasisteadyState out;
    out.level = i;
    out.rho = hermitize(unvec(diag[i].basis * v, 27));
    const Matrix l0 = l_base - l_weak + c3s.real() * l_re + c3s.imag() * l_im;
    out.residual = (l0 * vec(out.rho)).norm() / (l0.norm() * vec(out.rho).norm());
    return out;
  }

  std::vector<DualState> duals(Complex c3_phys) const {
    const Complex c3s = c3_phys / scale;
    std::vector<DualState> out;
    for (int i = 0; i <= 3; ++i) {
      const Matrix l0r = diag_strong[i].at(c3s);
      const Vector w = reduced_null(l0r.adjoint(),
                                    "dual state of intensity level " + std::to_string(i));
      const Vector v = steady(c3s, i);
      // blocks of different levels are orthogonal, so the Gram matrix is
      // diagonal in reduced coordinates
      const Complex g = w.dot(v);
      if (std::abs(g) < 1e-12)
        throw NumericalError(NumericalError::Kind::degeneracy,
                             "dual/state Gram matrix is singular");
      DualState ds;
      ds.level = i;
      ds.rho = unvec(diag[i].basis * (w / std::conj(g)), 27);
      out.push_back(std::move(ds));
    }
    return out;
  }

  RateSet rates(Complex c3_phys) const {
    const Complex c3s = c3_phys / scale;
    RateSet rs;
    rs.n_levels = 4;

    std::array<Vector, 4> v;
    for (int i = 0; i <= 3; ++i) v[i] = steady(c3s, i);

    if (scheme == LevelScheme::V) {
      for (int i = 0; i <= 3; ++i) {
        // coherence sectors adjacent to level i: up/down[k] for k in {i-1, i}
        for (int k : {i - 1, i}) {
          if (k < 0 || k > 2) continue;
          const bool from_lo = (k == i);  // diag[i] is the lower level of pair k
          const Matrix& wu = from_lo ? up_maps[k].from_lo : up_maps[k].from_hi;
          const Matrix& wd = from_lo ? down_maps[k].from_lo : down_maps[k].from_hi;
          const Vector xu = pseudo_solve(up_strong[k].at(c3s), Vector(-(wu * v[i])),
                                         1e-10, 1e-8);
          const Vector xd = pseudo_solve(down_strong[k].at(c3s), Vector(-(wd * v[i])),
                                         1e-10, 1e-8);
          for (int j = 0; j <= 3; ++j) {
            if (j == i) continue;
            rs.p(i, j) += ((up_maps[k].g[j] * xu).value().real() +
                           (down_maps[k].g[j] * xd).value().real()) *
                          scale;
          }
        }
      }
      return rs;
    }

    // D scheme
    std::array<Vector, 4> w;
    std::array<Complex, 4> gram;
    for (int i = 0; i <= 3; ++i) {
      w[i] = reduced_null(diag_strong[i].at(c3s).adjoint(),
                          "dual state of intensity level " + std::to_string(i));
      gram[i] = w[i].dot(v[i]);
      if (std::abs(gram[i]) < 1e-12)
        throw NumericalError(NumericalError::Kind::degeneracy,
                             "dual/state Gram matrix is singular");
    }
    double worst_resolvent = 0.0;
    for (int i = 0; i <= 3; ++i) {
      std::array<double, 4> alpha{};
      for (int j = std::max(0, i - 1); j <= std::min(3, i + 1); ++j) {
        const Complex a = w[j].dot(diag_weak[j][i] * v[i]) / gram[j];
        alpha[j] = a.real();
        if (j != i) rs.p(i, j) = alpha[j] * scale;
      }
      // Dropped-correction norm; the subtraction can cancel exactly (at
      // c3 = 0 a weak jump maps one quasisteady state onto the next), so
      // the right-hand side is judged against the pre-cancellation scale.
      double norm2 = 0.0;
      for (int j = std::max(0, i - 1); j <= std::min(3, i + 1); ++j) {
        const Vector mv = diag_weak[j][i] * v[i];
        const Vector c = mv - alpha[j] * v[j];
        const double ref = mv.norm() + std::abs(alpha[j]) * v[j].norm();
        if (c.norm() <= 1e-12 * ref) continue;
        const Vector y = pseudo_solve(diag_strong[j].at(c3s), Vector(-c), 1e-10,
                                      std::max(1e-8, 1e-8 * ref / c.norm()));
        norm2 += y.squaredNorm();
      }
      worst_resolvent = std::max(worst_resolvent, std::sqrt(norm2));
    }
    rs.resolvent_norm = worst_resolvent;
    return rs;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

QuasisteadyState quasisteady_state(const SystemParams& p, int level, SolvePath path) {
  validate_params(p);
  if (level < 0 || level > p.n_atoms) throw ParameterError("intensity level out of range");
  if (path == SolvePath::reduced) return ReducedEngine(p).quasisteady(p.c3, level);
  const double s = scale_of(p);
  const SystemParams ps = scaled_params(p, s);
  return full_quasisteady(ps, liouvillian(ps).strong, level);
}

std::vector<DualState> dual_states(const SystemParams& p, SolvePath path) {
  validate_params(p);
  if (path == SolvePath::reduced) return ReducedEngine(p).duals(p.c3);
  const double s = scale_of(p);
  const SystemParams ps = scaled_params(p, s);
  const LiouvillianParts lp = liouvillian(ps);
  std::vector<Matrix> states;
  for (int i = 0; i <= ps.n_atoms; ++i)
    states.push_back(full_quasisteady(ps, lp.strong, i).rho);
  const auto duals = biorthonormalize(full_dual_directions(ps, lp.strong), states);
  std::vector<DualState> out;
  for (int i = 0; i <= ps.n_atoms; ++i)
    out.push_back(DualState{i, duals[static_cast<std::size_t>(i)]});
  return out;
}

RateSet transition_rates(const SystemParams& p, SolvePath path) {
  validate_params(p);
  if (path == SolvePath::reduced) return ReducedEngine(p).rates(p.c3);
  return full_rates(p);
}

RateSet closed_form_V(const SystemParams& p) {
  if (p.n_atoms != 3) throw ParameterError("closed forms are for three atoms");
  if (p.omega3 <= 0.0) throw ParameterError("closed forms require Omega3 > 0");
  const double a3 = p.a3, o2 = p.omega2, o3 = p.omega3;
  const double rec = p.c3.real();
  const double k = a3 * a3 + 2.0 * o3 * o3;
  const double base_up = a3 * o2 * o2 / (o3 * o3);          // single-atom shelving rate
  const double base_dn = a3 * a3 * a3 * o2 * o2 / (o3 * o3 * k);
  const double k4 = a3 * (a3 * a3 + 4.0 * o3 * o3) / (k * k);
  RateSet rs;
  rs.p(0, 1) = 3.0 * base_up;
  rs.p(1, 0) = base_dn;
  rs.p(1, 2) = 2.0 * base_up * (1.0 + 2.0 * rec * a3 / k);
  rs.p(2, 1) = 2.0 * base_dn * (1.0 + 2.0 * rec * k4);
  rs.p(2, 3) = base_up * (1.0 + 4.0 * rec * a3 / k);
  rs.p(3, 2) = 3.0 * base_dn * (1.0 + 4.0 * rec * k4);
  return rs;
}

RateSet closed_form_D(const SystemParams& p) {
  if (p.n_atoms != 3) throw ParameterError("closed forms are for three atoms");
  if (p.omega3 <= 0.0) throw ParameterError("closed forms require Omega3 > 0");
  const double a1 = p.a1, a2 = p.a2, a3 = p.a3, o3 = p.omega3;
  const double k = a3 * a3 + 2.0 * o3 * o3;
  const double c2 = std::norm(p.c3);
  const double u = c2 + 2.0 * a3 * p.c3.real();
  const Complex apc = a3 + p.c3;
  RateSet rs;
  rs.p(0, 1) = 3.0 * a1;
  rs.p(1, 2) = 2.0 * a1;
  rs.p(2, 3) = a1;
  rs.p(1, 0) = a2 * o3 * o3 / k;
  rs.p(2, 1) = 2.0 * a2 * o3 * o3 * k / (k * k + a3 * a3 * u);
  rs.p(3, 2) = 3.0 * a2 * o3 * o3 * (k * k + a3 * a3 * u) /
               (k * (k * k + 3.0 * a3 * a3 * u) +
                2.0 * a3 * a3 * (c2 * std::norm(apc) + u * u));
  return rs;
}

RateSet closed_form(const SystemParams& p) {
  return p.scheme == LevelScheme::V ? closed_form_V(p) : closed_form_D(p);
}

void period_statistics(RateSet& rs) {
  const int levels = rs.n_levels;
  Eigen::Vector4d exit = Eigen::Vector4d::Zero();
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j)
      if (j != i) exit(i) += rs.p(i, j);
    if (exit(i) <= 0.0)
      throw UnphysicalConfigError("intensity level " + std::to_string(i) +
                                  " is absorbing: no exit rate");
  }
  // Unnormalized time fractions from detailed balance along the chain.
  Eigen::Vector4d pi = Eigen::Vector4d::Zero();
  pi(0) = 1.0;
  for (int i = 0; i + 1 < levels; ++i) {
    if (rs.p(i + 1, i) <= 0.0)
      throw UnphysicalConfigError("intensity level " + std::to_string(i + 1) +
                                  " has no return rate");
    pi(i + 1) = pi(i) * rs.p(i, i + 1) / rs.p(i + 1, i);
  }
  pi /= pi.sum();
  rs.n = Eigen::Vector4d::Zero();
  rs.T = Eigen::Vector4d::Zero();
  for (int i = 0; i < levels; ++i) {
    rs.T(i) = 1.0 / exit(i);
    rs.n(i) = pi(i) * exit(i);
  }
}

namespace {

double exit_rate(const RateSet& rs, int i) {
  double e = 0.0;
  for (int j = 0; j < rs.n_levels; ++j)
    if (j != i) e += rs.p(i, j);
  return e;
}

// Rate of double jumps passing through interior level k, exactly
// (window = false drops the exponential factors' exact form and keeps the
// leading order in t_m).
double dj_through(const RateSet& rs, int k, double t_m, bool leading) {
  const double ek = exit_rate(rs, k);
  const double win = leading ? ek * t_m : 1.0 - std::exp(-ek * t_m);
  double rate = 0.0;
  // ascending: ... k-1 -> k -> k+1
  rate += rs.n(k - 1) * (rs.p(k - 1, k) / exit_rate(rs, k - 1)) * (rs.p(k, k + 1) / ek) * win;
  // descending: k+1 -> k -> k-1
  rate += rs.n(k + 1) * (rs.p(k + 1, k) / exit_rate(rs, k + 1)) * (rs.p(k, k - 1) / ek) * win;
  return rate;
}

}  // namespace

double double_jump_rate(const RateSet& rs, double t_m) {
  double total = 0.0;
  for (int k = 1; k + 1 < rs.n_levels; ++k) total += dj_through(rs, k, t_m, true);
  return total;
}

DoubleJumpComponents double_jump_components(const RateSet& rs, double t_m) {
  DoubleJumpComponents c;
  if (rs.n_levels < 3) return c;
  const double e1 = exit_rate(rs, 1);
  c.dj02 = rs.n(0) * (rs.p(0, 1) / exit_rate(rs, 0)) * (rs.p(1, 2) / e1) *
           (1.0 - std::exp(-e1 * t_m));
  c.dj20 = rs.n(2) * (rs.p(2, 1) / exit_rate(rs, 2)) * (rs.p(1, 0) / e1) *
           (1.0 - std::exp(-e1 * t_m));
  if (rs.n_levels >= 4) {
    const double e2 = exit_rate(rs, 2);
    c.dj13 = rs.n(1) * (rs.p(1, 2) / e1) * (rs.p(2, 3) / e2) *
             (1.0 - std::exp(-e2 * t_m));
    c.dj31 = rs.n(3) * (rs.p(3, 2) / exit_rate(rs, 3)) * (rs.p(2, 1) / e2) *
             (1.0 - std::exp(-e2 * t_m));
  }
  return c;
}

double triple_jump_rate(const RateSet& rs, double t_m) {
  // leading order of triple_jump_exact: both window factors -> exit * t_m
  double total = 0.0;
  for (int k = 0; k + 3 < rs.n_levels; ++k) {
    total += rs.n(k) * (rs.p(k, k + 1) / exit_rate(rs, k)) * rs.p(k + 1, k + 2) *
             rs.p(k + 2, k + 3) * t_m * t_m;
    total += rs.n(k + 3) * (rs.p(k + 3, k + 2) / exit_rate(rs, k + 3)) *
             rs.p(k + 2, k + 1) * rs.p(k + 1, k) * t_m * t_m;
  }
  return total;
}

double triple_jump_exact(const RateSet& rs, double t_m) {
  double total = 0.0;
  for (int k = 0; k + 3 < rs.n_levels; ++k) {
    const double e1 = exit_rate(rs, k + 1), e2 = exit_rate(rs, k + 2);
    const double w1 = 1.0 - std::exp(-e1 * t_m), w2 = 1.0 - std::exp(-e2 * t_m);
    total += rs.n(k) * (rs.p(k, k + 1) / exit_rate(rs, k)) *
             (rs.p(k + 1, k + 2) / e1) * w1 * (rs.p(k + 2, k + 3) / e2) * w2;
    total += rs.n(k + 3) * (rs.p(k + 3, k + 2) / exit_rate(rs, k + 3)) *
             (rs.p(k + 2, k + 1) / e2) * w2 * (rs.p(k + 1, k) / e1) * w1;
  }
  return total;
}

double double_jump_rate_closed(const Eigen::Matrix4d& p, double t_m) {
  const double den = p(2, 1) * p(3, 2) * (p(0, 1) + p(1, 0)) +
                     p(0, 1) * p(1, 2) * (p(2, 3) + p(3, 2));
  return 2.0 * p(0, 1) * p(1, 2) * p(2, 1) * p(3, 2) * (p(1, 0) + p(2, 3)) * t_m / den;
}

double triple_jump_rate_closed(const Eigen::Matrix4d& p, double t_m) {
  const double den = p(2, 1) * p(3, 2) * (p(0, 1) + p(1, 0)) +
                     p(0, 1) * p(1, 2) * (p(2, 3) + p(3, 2));
  return 2.0 * p(0, 1) * p(1, 0) * p(1, 2) * p(2, 1) * p(2, 3) * p(3, 2) * t_m * t_m / den;
}

void finalize_rates(RateSet& rs, double t_m) {
  period_statistics(rs);
  rs.t_m = t_m;
  rs.n_dj = double_jump_rate(rs, t_m);
  rs.n_tj = triple_jump_rate(rs, t_m);
}

double population_flow_rate(const SystemParams& p, const DickeBasis& db,
                            const Matrix& rho, int level) {
  if (p.scheme != LevelScheme::V)
    throw ParameterError("the coherence flow relation applies to the V scheme");
  const Matrix s1 = collective_lowering(3, 1);
  const Matrix hw = 0.5 * p.omega2 * (s1 + Matrix(s1.adjoint()));
  const Matrix h_ad = db.u.adjoint() * hw * db.u;
  const Matrix rho_ad = db.u.adjoint() * rho * db.u;
  double flow = 0.0;
  for (int x = 0; x < 27; ++x) {
    if (db.states[x].level != level) continue;
    for (int y = 0; y < 27; ++y)
      flow += 2.0 * h_ad(x, y).real() * rho_ad(y, x).imag();
  }
  return flow;
}

struct RatePipeline::Impl {
  ReducedEngine engine;
  explicit Impl(const SystemParams& p) : engine(p) {}
};

RatePipeline::RatePipeline(const SystemParams& base) : impl_(nullptr) {
  validate_params(base);
  impl_ = std::make_unique<Impl>(base);
}
RatePipeline::~RatePipeline() = default;

RateSet RatePipeline::rates_at(Complex c3) const {
  SystemParams p = impl_->engine.phys;
  p.c3 = c3;
  validate_params(p);  // the coupling override can break collective positivity
  return impl_->engine.rates(c3);
}

const SystemParams& RatePipeline::base() const { return impl_->engine.phys; }

}  // namespace coopjump
