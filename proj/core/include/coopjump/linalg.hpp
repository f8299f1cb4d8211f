#pragma once

#include <Eigen/Dense>

#include "coopjump/operators.hpp"

namespace coopjump {

// Column-stacking vectorization: vec(M)(col*rows + row) = M(row, col),
// so vec(A X B) = (B^T (x) A) vec(X).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, int rows);

// (M + M^dagger) / 2
Matrix hermitize(const Matrix& m);

// Superoperator of X -> A X B under column stacking.
Matrix sandwich_superop(const Matrix& a, const Matrix& b);

// Orthonormal basis of the null space of m: right singular vectors whose
// singular values fall below rel_tol * sigma_max.  Columns of the result.
Matrix null_space(const Matrix& m, double rel_tol = 1e-10);

// Rank-revealing least-squares solve of a x = b.  Throws
// NumericalError(solver) if the residual exceeds residual_tol * |b|
// (i.e. b has a component outside the range of a).
Vector pseudo_solve(const Matrix& a, const Vector& b, double rel_tol = 1e-10,
                    double residual_tol = 1e-8);

// Condition number estimate from the SVD.
double condition_number(const Matrix& m);

}  // namespace coopjump
