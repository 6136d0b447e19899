#pragma once

#include <Eigen/Dense>
#include <span>

namespace menkf {

// Column-major throughout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column-major stacking of `m` into a vector of length rows*cols.
Vector vec(const Matrix& m);

/// Inverse of vec().
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product, shape (rA*rB) x (cA*cB).
Matrix kron(const Matrix& a, const Matrix& b);

/// Solves A X = B for symmetric positive definite A via Cholesky of
/// A + ridge*I. Throws Error{kNotPositiveDefinite} when the factorization
/// fails.
Matrix solve_spd(const Matrix& a, const Matrix& b, double ridge = 0.0);

/// (C + C^T) / 2
Matrix symmetrize(const Matrix& c);

/// Linear-interpolation quantile on the sorted sample: h = q*(n-1),
/// interpolated between order statistics floor(h) and ceil(h).
double empirical_quantile(std::span<const double> values, double q);

bool all_finite(const Matrix& m);

}  // namespace menkf
