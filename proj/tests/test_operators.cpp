#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <cstdio>
#include <random>

#include <coopjump/errors.hpp>
#include <coopjump/linalg.hpp>
#include <coopjump/model.hpp>
#include <coopjump/operators.hpp>

using namespace coopjump;

namespace {

SystemParams v3() {
  SystemParams p;
  p.scheme = LevelScheme::V;
  p.a3 = 2e8;
  p.omega3 = 5e7;
  p.omega2 = 1e4;
  p.c3 = Complex(3e7, -2e7);
  return p;
}

SystemParams d3() {
  SystemParams p;
  p.scheme = LevelScheme::D;
  p.a1 = 1.0;
  p.a2 = 2.0;
  p.a3 = 2e8;
  p.omega3 = 1e7;
  p.c3 = Complex(-5e7, 4e7);
  p.c1 = Complex(0.3, -0.1);
  p.c2 = Complex(-0.5, 0.8);
  return p;
}

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return Matrix(0.5 * (m + m.adjoint()));
}

Matrix random_density(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  Matrix rho = m * m.adjoint();
  rho /= rho.trace();
  return rho;
}

// Hamiltonian commutator part of the generator in column-stacking layout.
Matrix commutator_superop(const Matrix& h) {
  const int d = static_cast<int>(h.rows());
  const Matrix id = Matrix::Identity(d, d);
  return Complex(0, -1) * (Eigen::kroneckerProduct(id, h).eval() -
                           Eigen::kroneckerProduct(h.conjugate(), id).eval());
}

Matrix reset_from_channels(const SystemParams& p) {
  Matrix sum = Matrix::Zero(729, 729);
  for (const auto& ch : jump_channels(p))
    sum += ch.rate * Eigen::kroneckerProduct(ch.op.conjugate(), ch.op).eval();
  return sum;
}

}  // namespace

TEST_CASE("single-atom lowering operators") {
  // Levels are ordered ground, shelf, excited; transitions are
  // 1: shelf->ground, 2: excited->shelf, 3: excited->ground.
  const Eigen::Matrix3cd s1 = single_atom_lowering(1);
  const Eigen::Matrix3cd s2 = single_atom_lowering(2);
  const Eigen::Matrix3cd s3 = single_atom_lowering(3);
  CHECK(s1(0, 1) == Complex(1, 0));
  CHECK(s2(1, 2) == Complex(1, 0));
  CHECK(s3(0, 2) == Complex(1, 0));
  CHECK(s1.squaredNorm() == 1.0);
  CHECK(s2.squaredNorm() == 1.0);
  CHECK(s3.squaredNorm() == 1.0);
  CHECK((s3 - s1 * s2).norm() == 0.0);  // 3->1 equals 3->2 then 2->1
  CHECK_THROWS_AS(single_atom_lowering(0), ParameterError);
  CHECK_THROWS_AS(single_atom_lowering(4), ParameterError);
}

TEST_CASE("atom_lowering acts on the addressed atom only") {
  const Matrix s = atom_lowering(3, 2, 3);
  // |x1 x2 x3> indexes as 9 x1 + 3 x2 + x3; atom 2 maps excited->ground.
  // <1 1 1| S_23 |1 3 1> = 1: column 9*0+3*2+0 = 6 row 0.
  CHECK(s(0, 6) == Complex(1, 0));
  CHECK(s.cwiseAbs().sum() == doctest::Approx(9.0));  // 3^2 product states
  CHECK_THROWS_AS(atom_lowering(3, 0, 3), ParameterError);
  CHECK_THROWS_AS(atom_lowering(3, 4, 3), ParameterError);

  Matrix coll = collective_lowering(3, 3);
  CHECK((coll - (atom_lowering(3, 1, 3) + atom_lowering(3, 2, 3) + atom_lowering(3, 3, 3)))
            .norm() == 0.0);
}

TEST_CASE("single-atom conditional Hamiltonian has the textbook entries") {
  SystemParams p = v3();
  p.n_atoms = 1;
  p.c3 = Complex(0, 0);
  const Matrix h = conditional_hamiltonian(p);
  REQUIRE(h.rows() == 3);
  CHECK(h(0, 2) == Complex(p.omega3 / 2, 0));
  CHECK(h(2, 0) == Complex(p.omega3 / 2, 0));
  CHECK(h(0, 1) == Complex(p.omega2 / 2, 0));
  CHECK(h(1, 0) == Complex(p.omega2 / 2, 0));
  CHECK(h(2, 2) == Complex(0, -p.a3 / 2));
  CHECK(h(1, 1) == Complex(0, 0));

  SystemParams d = d3();
  d.n_atoms = 1;
  d.c1 = d.c2 = d.c3 = Complex(0, 0);
  const Matrix hd = conditional_hamiltonian(d);
  CHECK(hd(0, 1) == Complex(0, 0));  // no weak laser in the D scheme
  CHECK(hd(2, 2) == Complex(0, -(d.a3 + d.a2) / 2));
  CHECK(hd(1, 1) == Complex(0, -d.a1 / 2));
}

TEST_CASE("decay-jump consistency: i(H - H^dag) equals the channel sum") {
  for (const SystemParams& p : {v3(), d3()}) {
    const Matrix h = conditional_hamiltonian(p);
    Matrix lhs = Complex(0, 1) * (h - h.adjoint());
    for (const auto& ch : jump_channels(p))
      lhs -= ch.rate * (ch.op.adjoint() * ch.op);
    CAPTURE(to_string(p.scheme));
    CHECK(lhs.norm() < 1e-12 * h.norm());
  }
}

TEST_CASE("channel rates and structure switch at Re C = 0") {
  SystemParams p = v3();
  const auto coll = jump_channels(p);
  REQUIRE(coll.size() == 3);  // symmetric channel + doubly degenerate pair
  double total = 0.0;
  for (const auto& ch : coll) {
    CHECK(ch.transition == 3);
    CHECK(ch.atom == 0);
    total += ch.rate;
  }
  CHECK(total == doctest::Approx(3 * p.a3).epsilon(1e-14));
  // one channel at A + 2 Re C, two at A - Re C
  int plus = 0, minus = 0;
  for (const auto& ch : coll) {
    if (std::abs(ch.rate - (p.a3 + 2 * p.c3.real())) < 1e-6 * p.a3) ++plus;
    if (std::abs(ch.rate - (p.a3 - p.c3.real())) < 1e-6 * p.a3) ++minus;
  }
  CHECK(plus == 1);
  CHECK(minus == 2);

  p.c3 = Complex(0.0, 4e7);  // pure level shift: emission stays independent
  const auto indep = jump_channels(p);
  REQUIRE(indep.size() == 3);
  for (const auto& ch : indep) {
    CHECK(ch.rate == p.a3);
    CHECK(ch.atom != 0);  // per-atom channels keep the emitter label
  }

  const auto dch = jump_channels(d3());
  CHECK(dch.size() == 9);  // collective strong triple + per-atom weak lines
}

TEST_CASE("unphysical collective rate is rejected at channel construction") {
  SystemParams p = v3();
  p.c3 = Complex(1.2 * p.a3, 0.0);
  CHECK_THROWS_AS(jump_channels(p), UnphysicalConfigError);
}

TEST_CASE("reset of the fully excited state feeds each one-atom-shelved state") {
  SystemParams d = d3();
  d.c1 = d.c2 = d.c3 = Complex(0, 0);
  Matrix rho = Matrix::Zero(27, 27);
  rho(26, 26) = 1.0;  // all three atoms excited
  Matrix out = Matrix::Zero(27, 27);
  for (const auto& ch : jump_channels(d))
    if (ch.transition == 2) out += ch.rate * (ch.op * rho * ch.op.adjoint());
  CHECK(std::abs(out.trace() - 3.0 * d.a2) < 1e-12);
  for (int idx : {17, 23, 25})  // one atom dropped to the shelf
    CHECK(std::abs(out(idx, idx) - d.a2) < 1e-12);
}

TEST_CASE("reset of the fully shelved state feeds each one-atom-ground state") {
  SystemParams d = d3();
  d.c1 = d.c2 = d.c3 = Complex(0, 0);
  Matrix rho = Matrix::Zero(27, 27);
  rho(13, 13) = 1.0;  // all three atoms shelved
  Matrix out = Matrix::Zero(27, 27);
  for (const auto& ch : jump_channels(d))
    if (ch.transition == 1) out += ch.rate * (ch.op * rho * ch.op.adjoint());
  CHECK(std::abs(out.trace() - 3.0 * d.a1) < 1e-12);
  for (int idx : {4, 10, 12})
    CHECK(std::abs(out(idx, idx) - d.a1) < 1e-12);
}

TEST_CASE("liouvillian = commutator part + channel reset part") {
  for (const SystemParams& p : {v3(), d3()}) {
    const LiouvillianParts lp = liouvillian(p);
    const Matrix rebuilt =
        commutator_superop(conditional_hamiltonian(p)) + reset_from_channels(p);
    CAPTURE(to_string(p.scheme));
    CHECK((lp.full - rebuilt).norm() < 1e-12 * lp.full.norm());
    CHECK((lp.full - lp.strong - lp.weak).norm() < 1e-12 * lp.full.norm());
  }
}

TEST_CASE("strong part carries no weak-process dependence") {
  SystemParams p = v3();
  SystemParams quiet = p;
  quiet.omega2 = 0.0;
  CHECK((liouvillian(p).strong - liouvillian(quiet).strong).norm() == 0.0);

  SystemParams d = d3();
  SystemParams dq = d;
  dq.a1 = dq.a2 = 0.0;
  dq.c1 = dq.c2 = Complex(0, 0);
  CHECK((liouvillian(d).strong - liouvillian(dq).strong).norm() == 0.0);
}

TEST_CASE("generator annihilates the trace and preserves Hermiticity") {
  std::mt19937_64 rng(11);
  for (const SystemParams& p : {v3(), d3()}) {
    const LiouvillianParts lp = liouvillian(p);
    const double scale = lp.full.cwiseAbs().maxCoeff();
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix rho = random_density(27, rng);
      const Matrix drho = unvec(lp.full * vec(rho), 27);
      CHECK(std::abs(drho.trace()) < 1e-10 * scale);
      CHECK((drho - drho.adjoint()).norm() < 1e-10 * scale);
    }
  }
}

TEST_CASE("uncoupled atoms evolve independently (product rule)") {
  std::mt19937_64 rng(23);
  SystemParams p = v3();
  p.c3 = Complex(0, 0);
  SystemParams p1 = p;
  p1.n_atoms = 1;

  const LiouvillianParts l3 = liouvillian(p);
  const LiouvillianParts l1 = liouvillian(p1);

  const Matrix ra = random_density(3, rng);
  const Matrix rb = random_density(3, rng);
  const Matrix rc = random_density(3, rng);
  auto k3 = [](const Matrix& a, const Matrix& b, const Matrix& c) {
    return Eigen::kroneckerProduct(a, Eigen::kroneckerProduct(b, c).eval()).eval();
  };

  const Matrix dra = unvec(l1.full * vec(ra), 3);
  const Matrix drb = unvec(l1.full * vec(rb), 3);
  const Matrix drc = unvec(l1.full * vec(rc), 3);

  const Matrix lhs = unvec(l3.full * vec(k3(ra, rb, rc)), 27);
  const Matrix rhs = k3(dra, rb, rc) + k3(ra, drb, rc) + k3(ra, rb, drc);
  CHECK((lhs - rhs).norm() < 1e-9 * lhs.norm());
}

TEST_CASE("generator is affine in the strong coupling") {
  for (SystemParams p : {v3(), d3()}) {
    const StrongCouplingDecomposition dec = strong_coupling_decomposition(p);
    for (const Complex c : {Complex(1e7, -3e7), Complex(-4e7, 0.0), Complex(0, 0)}) {
      p.c3 = c;
      const Matrix full = dec.base + c.real() * dec.re_part + c.imag() * dec.im_part;
      const LiouvillianParts lp = liouvillian(p);
      CAPTURE(to_string(p.scheme));
      CHECK((full - lp.full).norm() < 1e-12 * lp.full.norm());
      const Matrix strong = full - dec.weak;
      CHECK((strong - lp.strong).norm() < 1e-12 * lp.full.norm());
    }
  }
}

TEST_CASE("matrix files round trip") {
  std::mt19937_64 rng(5);
  const Matrix m = random_hermitian(11, rng);
  const std::string path = "test_matrix_roundtrip.bin";
  write_matrix(path, m);
  const Matrix back = read_matrix(path);
  CHECK((m - back).norm() == 0.0);
  std::remove(path.c_str());
}
