#include "coopjump/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <limits>
#include <sstream>

#include "coopjump/errors.hpp"

namespace coopjump {

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, int rows) {
  if (rows <= 0 || v.size() % rows != 0)
    throw ParameterError("unvec: vector length is not a multiple of the row count");
  return Eigen::Map<const Matrix>(v.data(), rows, static_cast<int>(v.size()) / rows);
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix sandwich_superop(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(b.transpose(), a).eval();
}

Matrix null_space(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = (sv.size() > 0 ? sv(0) : 0.0) * rel_tol;
  const int n = static_cast<int>(m.cols());
  int rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Vector pseudo_solve(const Matrix& a, const Vector& b, double rel_tol, double residual_tol) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel_tol);
  const Vector x = svd.solve(b);
  const double bnorm = b.norm();
  const double resid = (a * x - b).norm();
  if (bnorm > 0.0 && resid > residual_tol * bnorm) {
    std::ostringstream os;
    os << "pseudo_solve: relative residual " << resid / bnorm << " exceeds "
       << residual_tol << " (right-hand side leaves the operator range)";
    throw NumericalError(NumericalError::Kind::solver, os.str());
  }
  return x;
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) == 0.0)
    return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

}  // namespace coopjump
