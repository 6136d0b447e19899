#include "menkf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "menkf/error.hpp"

namespace menkf {

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "unvec: " + std::to_string(v.size()) + " entries cannot fill " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const Eigen::Index br = b.rows();
  const Eigen::Index bc = b.cols();
  Matrix out(a.rows() * br, a.cols() * bc);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    }
  }
  return out;
}

Matrix solve_spd(const Matrix& a, const Matrix& b, double ridge) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "solve_spd: A is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ", B has " +
                    std::to_string(b.rows()) + " rows");
  }
  Matrix shifted = a;
  if (ridge != 0.0) shifted.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "Cholesky factorization failed in solve_spd");
  }
  Matrix x = llt.solve(b);
  if (!all_finite(x)) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "non-finite solution in solve_spd");
  }
  return x;
}

Matrix symmetrize(const Matrix& c) { return 0.5 * (c + c.transpose()); }

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "empirical_quantile of empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "quantile level must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace menkf
