#include "coopjump/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coopjump/errors.hpp"
#include "coopjump/linalg.hpp"

namespace coopjump {

namespace {

int digit_index(const char* s) {
  // "ijk" -> product-basis index with atom 1 slowest
  return 9 * (s[0] - '1') + 3 * (s[1] - '1') + (s[2] - '1');
}

Vector dicke_column(std::initializer_list<std::pair<const char*, double>> terms) {
  Vector v = Vector::Zero(27);
  double norm2 = 0.0;
  for (const auto& [s, c] : terms) {
    v(digit_index(s)) = c;
    norm2 += c * c;
  }
  return v / std::sqrt(norm2);
}

int state_level(int n_atoms, int index) {
  int shelf = 0;
  for (int k = 0; k < n_atoms; ++k) {
    if (index % 3 == 1) ++shelf;
    index /= 3;
  }
  return n_atoms - shelf;
}

// vec(|row><col|) for real columns: col (x) row under column stacking.
Vector outer_vec(const Vector& row, const Vector& col) {
  const int d = static_cast<int>(row.size());
  Vector v(d * d);
  for (int c = 0; c < d; ++c) v.segment(c * d, d) = std::conj(col(c)) * row;
  return v;
}

}  // namespace

std::vector<std::vector<int>> intensity_subspaces(int n_atoms) {
  if (n_atoms < 1 || n_atoms > 3) throw ParameterError("n_atoms must be 1, 2 or 3");
  std::vector<std::vector<int>> levels(n_atoms + 1);
  for (int i = 0; i < hilbert_dim(n_atoms); ++i)
    levels[state_level(n_atoms, i)].push_back(i);
  return levels;
}

Matrix level_projector(int n_atoms, int level) {
  const int d = hilbert_dim(n_atoms);
  if (level < 0 || level > n_atoms) throw ParameterError("intensity level out of range");
  Matrix p = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    if (state_level(n_atoms, i) == level) p(i, i) = 1.0;
  return p;
}

Matrix permutation_operator(int n_atoms, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != n_atoms)
    throw ParameterError("permutation length must equal n_atoms");
  const int d = hilbert_dim(n_atoms);
  Matrix p = Matrix::Zero(d, d);
  for (int idx = 0; idx < d; ++idx) {
    int digits[3] = {0, 0, 0};
    int rest = idx;
    for (int k = n_atoms - 1; k >= 0; --k) {
      digits[k] = rest % 3;
      rest /= 3;
    }
    int target[3] = {0, 0, 0};
    for (int k = 0; k < n_atoms; ++k) target[perm[k]] = digits[k];
    int out = 0;
    for (int k = 0; k < n_atoms; ++k) out = 3 * out + target[k];
    p(out, idx) = 1.0;
  }
  return p;
}

std::vector<std::vector<int>> all_permutations(int n_atoms) {
  std::vector<int> base(n_atoms);
  for (int i = 0; i < n_atoms; ++i) base[i] = i;
  std::vector<std::vector<int>> out;
  do {
    out.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

Matrix symmetrize_density(const Matrix& rho, int n_atoms) {
  const auto perms = all_permutations(n_atoms);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& g : perms) {
    const Matrix p = permutation_operator(n_atoms, g);
    out += p * rho * p.adjoint();
  }
  return out / static_cast<double>(perms.size());
}

DickeBasis dicke_basis() {
  DickeBasis db;
  db.u = Matrix::Zero(27, 27);
  db.sym_cols.assign(4, {});
  db.ant_cols.assign(4, {});
  db.pair_ids.assign(4, {});

  struct Def {
    const char* label;
    int level;
    char irrep;
    Vector column;
  };
  const double q = 1.0;  // coefficients below are normalized by dicke_column
  std::vector<Def> defs;
  auto add = [&](const char* label, int level, char irrep,
                 std::initializer_list<std::pair<const char*, double>> terms) {
    defs.push_back(Def{label, level, irrep, dicke_column(terms)});
  };

  // level 0: all atoms shelved
  add("e2", 0, 's', {{"222", q}});
  // level 1: one atom active
  add("s122", 1, 's', {{"122", 1}, {"221", 1}, {"212", 1}});
  add("b122", 1, 'p', {{"122", 2}, {"221", -1}, {"212", -1}});
  add("c122", 1, 'p', {{"221", 1}, {"212", -1}});
  add("s322", 1, 's', {{"322", 1}, {"223", 1}, {"232", 1}});
  add("b322", 1, 'p', {{"322", 2}, {"223", -1}, {"232", -1}});
  add("c322", 1, 'p', {{"223", 1}, {"232", -1}});
  // level 2: two atoms active
  add("s211", 2, 's', {{"211", 1}, {"112", 1}, {"121", 1}});
  add("b211", 2, 'p', {{"211", 2}, {"112", -1}, {"121", -1}});
  add("c211", 2, 'p', {{"112", 1}, {"121", -1}});
  add("s123", 2, 's',
      {{"123", 1}, {"231", 1}, {"312", 1}, {"132", 1}, {"213", 1}, {"321", 1}});
  add("a123", 2, 'a',
      {{"123", 1}, {"231", 1}, {"312", 1}, {"132", -1}, {"213", -1}, {"321", -1}});
  add("b123", 2, 'p',
      {{"123", 2}, {"231", -1}, {"312", -1}, {"132", 2}, {"213", -1}, {"321", -1}});
  add("c123", 2, 'p', {{"231", 1}, {"312", -1}, {"213", -1}, {"321", 1}});
  add("d123", 2, 'p',
      {{"123", 2}, {"231", -1}, {"312", -1}, {"132", -2}, {"213", 1}, {"321", 1}});
  add("e123", 2, 'p', {{"231", 1}, {"312", -1}, {"213", 1}, {"321", -1}});
  add("s233", 2, 's', {{"233", 1}, {"332", 1}, {"323", 1}});
  add("b233", 2, 'p', {{"233", 2}, {"332", -1}, {"323", -1}});
  add("c233", 2, 'p', {{"332", 1}, {"323", -1}});
  // level 3: no atom shelved
  add("g", 3, 's', {{"111", q}});
  add("s311", 3, 's', {{"311", 1}, {"113", 1}, {"131", 1}});
  add("b311", 3, 'p', {{"311", 2}, {"113", -1}, {"131", -1}});
  add("c311", 3, 'p', {{"113", 1}, {"131", -1}});
  add("s133", 3, 's', {{"133", 1}, {"331", 1}, {"313", 1}});
  add("b133", 3, 'p', {{"133", 2}, {"331", -1}, {"313", -1}});
  add("c133", 3, 'p', {{"331", 1}, {"313", -1}});
  add("e3", 3, 's', {{"333", q}});

  auto column_of = [&](const char* label) -> int {
    for (int k = 0; k < static_cast<int>(defs.size()); ++k)
      if (defs[k].label == std::string(label)) return k;
    throw ParameterError(std::string("unknown adapted state ") + label);
  };

  for (int k = 0; k < 27; ++k) {
    db.u.col(k) = defs[k].column;
    db.states.push_back(AdaptedState{defs[k].label, defs[k].level, defs[k].irrep, -1});
    if (defs[k].irrep == 's') db.sym_cols[defs[k].level].push_back(k);
    if (defs[k].irrep == 'a') db.ant_cols[defs[k].level].push_back(k);
  }

  // Canonically aligned pairs: (f1, f2) transform identically for every
  // pair (atom-2/3 swap: f1 -> f1, f2 -> -f2; cyclic shift: rotation by
  // -2pi/3).  The (b, c) families are already aligned; the remaining
  // level-2 pair is (e123, -d123).
  auto add_pair = [&](const char* f1, const char* f2, double sign2) {
    const int k1 = column_of(f1), k2 = column_of(f2);
    IrrepPair pair;
    pair.level = defs[k1].level;
    pair.f1 = defs[k1].column;
    pair.f2 = sign2 * defs[k2].column;
    db.pairs.push_back(std::move(pair));
    const int id = static_cast<int>(db.pairs.size()) - 1;
    db.pair_ids[defs[k1].level].push_back(id);
    db.states[k1].pair_id = id;
    db.states[k2].pair_id = id;
  };
  add_pair("b122", "c122", 1.0);
  add_pair("b322", "c322", 1.0);
  add_pair("b211", "c211", 1.0);
  add_pair("b123", "c123", 1.0);
  add_pair("e123", "d123", -1.0);
  add_pair("b233", "c233", 1.0);
  add_pair("b311", "c311", 1.0);
  add_pair("b133", "c133", 1.0);
  return db;
}

SectorBasis sector_basis(const DickeBasis& db, int row_level, int col_level, Sector s) {
  if (row_level < 0 || row_level > 3 || col_level < 0 || col_level > 3)
    throw ParameterError("intensity level out of range");
  SectorBasis out;
  out.row_level = row_level;
  out.col_level = col_level;
  out.sector = s;

  std::vector<Vector> cols;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  auto state_cols = [&](const std::vector<int>& ids) {
    std::vector<Vector> v;
    for (int k : ids) v.push_back(db.u.col(k));
    return v;
  };
  const auto row_s = state_cols(db.sym_cols[row_level]);
  const auto row_a = state_cols(db.ant_cols[row_level]);
  const auto col_s = state_cols(db.sym_cols[col_level]);
  const auto col_a = state_cols(db.ant_cols[col_level]);
  std::vector<const IrrepPair*> row_p, col_p;
  for (int id : db.pair_ids[row_level]) row_p.push_back(&db.pairs[id]);
  for (int id : db.pair_ids[col_level]) col_p.push_back(&db.pairs[id]);

  switch (s) {
    case Sector::symmetric:
      for (const auto& u : row_s)
        for (const auto& v : col_s) cols.push_back(outer_vec(u, v));
      for (const auto& u : row_a)
        for (const auto& v : col_a) cols.push_back(outer_vec(u, v));
      for (const auto* p : row_p)
        for (const auto* r : col_p)
          cols.push_back(inv_sqrt2 *
                         (outer_vec(p->f1, r->f1) + outer_vec(p->f2, r->f2)));
      break;
    case Sector::antisymmetric:
      for (const auto& u : row_s)
        for (const auto& v : col_a) cols.push_back(outer_vec(u, v));
      for (const auto& u : row_a)
        for (const auto& v : col_s) cols.push_back(outer_vec(u, v));
      for (const auto* p : row_p)
        for (const auto* r : col_p)
          cols.push_back(inv_sqrt2 *
                         (outer_vec(p->f1, r->f2) - outer_vec(p->f2, r->f1)));
      break;
    case Sector::mixed:
      for (const auto& u : row_s)
        for (const auto* r : col_p) {
          cols.push_back(outer_vec(u, r->f1));
          cols.push_back(outer_vec(u, r->f2));
        }
      for (const auto& u : row_a)
        for (const auto* r : col_p) {
          cols.push_back(outer_vec(u, r->f1));
          cols.push_back(outer_vec(u, r->f2));
        }
      for (const auto* p : row_p) {
        for (const auto& v : col_s) {
          cols.push_back(outer_vec(p->f1, v));
          cols.push_back(outer_vec(p->f2, v));
        }
        for (const auto& v : col_a) {
          cols.push_back(outer_vec(p->f1, v));
          cols.push_back(outer_vec(p->f2, v));
        }
        for (const auto* r : col_p) {
          cols.push_back(inv_sqrt2 *
                         (outer_vec(p->f1, r->f1) - outer_vec(p->f2, r->f2)));
          cols.push_back(inv_sqrt2 *
                         (outer_vec(p->f1, r->f2) + outer_vec(p->f2, r->f1)));
        }
      }
      break;
  }

  out.basis = Matrix(27 * 27, static_cast<int>(cols.size()));
  for (int k = 0; k < static_cast<int>(cols.size()); ++k) out.basis.col(k) = cols[k];
  return out;
}

Matrix project_between(const Matrix& op, const SectorBasis& target, const SectorBasis& source) {
  return target.basis.adjoint() * op * source.basis;
}

Matrix reduce_operator(const Matrix& op, const SectorBasis& basis, double invariance_tol) {
  const Matrix mapped = op * basis.basis;
  const Matrix reduced = basis.basis.adjoint() * mapped;
  const double total = mapped.norm();
  const double leak = (mapped - basis.basis * reduced).norm();
  if (total > 0.0 && leak > invariance_tol * total) {
    std::ostringstream os;
    os << "operator leaks out of sector (" << basis.row_level << "," << basis.col_level
       << "): relative leakage " << leak / total;
    throw NumericalError(NumericalError::Kind::solver, os.str());
  }
  return reduced;
}

double leakage(const Vector& v, const SectorBasis& basis) {
  const double n = v.norm();
  if (n == 0.0) return 0.0;
  const Vector inside = basis.basis * (basis.basis.adjoint() * v);
  return (v - inside).norm() / n;
}

std::string sector_table(const DickeBasis& db) {
  std::ostringstream os;
  os << "block  sym  antisym  mixed  total\n";
  int tot_s = 0, tot_a = 0, tot_m = 0;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; j <= 3; ++j) {
      const int ds = static_cast<int>(sector_basis(db, i, j, Sector::symmetric).basis.cols());
      const int da = static_cast<int>(sector_basis(db, i, j, Sector::antisymmetric).basis.cols());
      const int dm = static_cast<int>(sector_basis(db, i, j, Sector::mixed).basis.cols());
      tot_s += ds;
      tot_a += da;
      tot_m += dm;
      os << "R_" << i << j << "    " << ds << "    " << da << "    " << dm << "    "
         << ds + da + dm << "\n";
    }
  os << "total  " << tot_s << "  " << tot_a << "  " << tot_m << "  "
     << tot_s + tot_a + tot_m << "\n";
  return os.str();
}

}  // namespace coopjump
