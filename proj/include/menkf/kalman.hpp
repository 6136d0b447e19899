#pragma once

#include "menkf/numerics.hpp"

namespace menkf {

/// y_t = H x_t + eps, eps ~ N(0, R);  x_t = M x_{t-1} + eta, eta ~ N(0, Q).
struct LinearStateSpace {
  Matrix observation;        // H, m x n
  Matrix transition;         // M, n x n
  Matrix observation_cov;    // R, m x m, SPD
  Matrix process_cov;        // Q, n x n, PSD
};

struct GaussianBelief {
  Vector mean;
  Matrix cov;
};

/// Forecast: mean = M mu, cov = M Sigma M^T + Q (symmetrized).
GaussianBelief kf_forecast(const GaussianBelief& prior,
                           const LinearStateSpace& model);

/// Update with gain K = Sigma H^T (H Sigma H^T + R)^{-1}; plain (I - K H)
/// Sigma covariance form, symmetrized. `ridge` is added to the innovation
/// covariance diagonal before factorization.
GaussianBelief kf_update(const GaussianBelief& forecast, const Vector& y,
                         const LinearStateSpace& model, double ridge = 0.0);

}  // namespace menkf
