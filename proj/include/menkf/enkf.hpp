#pragma once

#include <span>

#include "menkf/numerics.hpp"
#include "menkf/rng.hpp"

namespace menkf {

/// N x d matrix of state members, one member per row.
class Ensemble {
 public:
  Ensemble() = default;
  /// Throws when there are fewer than two members or a non-finite entry.
  explicit Ensemble(Matrix members);

  Eigen::Index size() const noexcept { return members_.rows(); }
  Eigen::Index dim() const noexcept { return members_.cols(); }

  const Matrix& members() const noexcept { return members_; }
  Matrix& members() noexcept { return members_; }

  auto member(Eigen::Index i) const { return members_.row(i); }

 private:
  Matrix members_;
};

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Sample mean and (1/N)-normalized covariance, symmetrized.
Moments ensemble_moments(const Ensemble& e);
Moments sample_moments(const Matrix& rows);

/// Multiplies anomalies about the ensemble mean by sqrt(factor).
void inflate(Matrix& rows, double factor);

struct UpdateOptions {
  // Multiplicative covariance inflation of the forecast; 1 disables it.
  double inflation = 1.0;
  // Added to the observation-space covariance diagonal.
  double ridge = 0.0;
  bool parallel = false;
  unsigned threads = 0;
};

/// Cross covariance L = Cov(x, h(x)) (d x m) and observation-space covariance
/// M = Cov(h(x), h(x)) (m x m). For a linear operator these are S H^T and
/// H S H^T.
struct GainFactors {
  Matrix cross;
  Matrix obs_cov;
};

GainFactors gain_factors(const Matrix& states, const Matrix& predicted);

/// Direct gain L (M + obs_var I)^{-1} for a single variance.
Matrix direct_gain(const GainFactors& factors, double obs_var);

/// Stochastic EnKF update for a linear observation operator H (m x d).
/// Member i receives perturbed observation y + v_i, v_i ~ N(0, obs_var[i] I),
/// drawn from rng.child(i), and shifts by L (M + obs_var[i] I)^{-1}
/// (y + v_i - H x_i). The factors are computed once for all members.
Ensemble enkf_update(const Ensemble& e, const Vector& y, const Matrix& h,
                     std::span<const double> obs_var, const RngStream& rng,
                     const UpdateOptions& opts = {});

/// Same update for a nonlinear observation operator, given the N x m matrix of
/// per-member predicted observations. Gain factors are joint sample
/// covariances of (state, prediction).
Ensemble enkf_update_predicted(const Ensemble& e, const Matrix& predicted,
                               const Vector& y, std::span<const double> obs_var,
                               const RngStream& rng,
                               const UpdateOptions& opts = {});

}  // namespace menkf
