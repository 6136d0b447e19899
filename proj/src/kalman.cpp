#include "menkf/kalman.hpp"

#include <string>

#include "menkf/error.hpp"

namespace menkf {

namespace {

void check_belief(const GaussianBelief& b, Eigen::Index n, const char* what) {
  if (b.mean.size() != n || b.cov.rows() != n || b.cov.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": belief dimension does not match state dimension " +
                    std::to_string(n));
  }
}

}  // namespace

GaussianBelief kf_forecast(const GaussianBelief& prior,
                           const LinearStateSpace& model) {
  const Matrix& m = model.transition;
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "kf_forecast: transition is not square");
  }
  check_belief(prior, m.cols(), "kf_forecast");
  if (model.process_cov.rows() != m.rows() || model.process_cov.cols() != m.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "kf_forecast: process covariance shape");
  }
  GaussianBelief out;
  out.mean = m * prior.mean;
  out.cov = symmetrize(m * prior.cov * m.transpose() + model.process_cov);
  return out;
}

GaussianBelief kf_update(const GaussianBelief& forecast, const Vector& y,
                         const LinearStateSpace& model, double ridge) {
  const Matrix& h = model.observation;
  check_belief(forecast, h.cols(), "kf_update");
  if (y.size() != h.rows() || model.observation_cov.rows() != h.rows() ||
      model.observation_cov.cols() != h.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "kf_update: observation has " + std::to_string(y.size()) +
                    " entries, H has " + std::to_string(h.rows()) + " rows");
  }
  const Matrix cross = forecast.cov * h.transpose();  // Sigma H^T
  const Matrix innovation_cov = symmetrize(h * cross + model.observation_cov);
  // K^T = S^{-1} (Sigma H^T)^T since S is symmetric
  const Matrix gain = solve_spd(innovation_cov, cross.transpose(), ridge).transpose();

  GaussianBelief out;
  out.mean = forecast.mean + gain * (y - h * forecast.mean);
  const Eigen::Index n = forecast.mean.size();
  out.cov = symmetrize((Matrix::Identity(n, n) - gain * h) * forecast.cov);
  return out;
}

}  // namespace menkf
