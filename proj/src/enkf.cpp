#include "menkf/enkf.hpp"

#include <cmath>
#include <string>

#include "menkf/error.hpp"
#include "menkf/parallel.hpp"

namespace menkf {

Ensemble::Ensemble(Matrix members) : members_(std::move(members)) {
  if (members_.rows() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "ensemble needs at least 2 members, got " +
                    std::to_string(members_.rows()));
  }
  if (!members_.allFinite()) {
    throw Error(ErrorCode::kNumerical, "ensemble contains non-finite entries");
  }
}

Moments sample_moments(const Matrix& rows) {
  if (rows.rows() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "moments need at least 2 members");
  }
  const double n = static_cast<double>(rows.rows());
  Moments out;
  out.mean = rows.colwise().mean().transpose();
  const Matrix anomalies = rows.rowwise() - out.mean.transpose();
  out.cov = symmetrize(anomalies.transpose() * anomalies / n);
  return out;
}

Moments ensemble_moments(const Ensemble& e) { return sample_moments(e.members()); }

void inflate(Matrix& rows, double factor) {
  if (!(factor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "inflation factor must be positive");
  }
  if (factor == 1.0) return;
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  rows = ((rows.rowwise() - mean) * std::sqrt(factor)).rowwise() + mean;
}

GainFactors gain_factors(const Matrix& states, const Matrix& predicted) {
  if (states.rows() != predicted.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "predicted observations must have one row per member");
  }
  const double n = static_cast<double>(states.rows());
  const Matrix xa = states.rowwise() - states.colwise().mean();
  const Matrix ha = predicted.rowwise() - predicted.colwise().mean();
  GainFactors f;
  f.cross = xa.transpose() * ha / n;
  f.obs_cov = symmetrize(ha.transpose() * ha / n);
  return f;
}

Matrix direct_gain(const GainFactors& factors, double obs_var) {
  const Eigen::Index m = factors.obs_cov.rows();
  const Matrix s = factors.obs_cov + obs_var * Matrix::Identity(m, m);
  return solve_spd(s, factors.cross.transpose()).transpose();
}

namespace {

void check_obs_var(std::span<const double> obs_var, Eigen::Index n) {
  if (static_cast<Eigen::Index>(obs_var.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "need one observation variance per member");
  }
  for (double v : obs_var) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "observation variance must be positive and finite");
    }
  }
}

// (M + v I)^{-1} = U diag(1 / (lambda + v)) U^T, so one eigendecomposition of
// M serves every member's variance.
Ensemble shift_members(const Ensemble& e, const Matrix& predicted,
                       const GainFactors& factors, const Vector& y,
                       std::span<const double> obs_var, const RngStream& rng,
                       const UpdateOptions& opts) {
  const Eigen::Index n = e.size();
  const Eigen::Index m = y.size();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(factors.obs_cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical,
                "eigendecomposition of observation-space covariance failed");
  }
  // Sample covariances are PSD; negative eigenvalues are round-off.
  const Vector lambda = eig.eigenvalues().cwiseMax(0.0).array() + opts.ridge;
  const Matrix& u = eig.eigenvectors();
  const Matrix cross_u = factors.cross * u;

  Matrix out = e.members();
  parallel_for(static_cast<std::size_t>(n), opts.parallel, opts.threads,
               [&](std::size_t idx) {
                 const auto i = static_cast<Eigen::Index>(idx);
                 RngStream member_rng = rng.child(idx);
                 const double sd = std::sqrt(obs_var[idx]);
                 Vector innovation(m);
                 for (Eigen::Index k = 0; k < m; ++k) {
                   innovation(k) = y(k) + sd * member_rng.normal() - predicted(i, k);
                 }
                 Vector z = u.transpose() * innovation;
                 for (Eigen::Index k = 0; k < m; ++k) {
                   const double denom = lambda(k) + obs_var[idx];
                   if (!(denom > 0.0)) {
                     throw Error(ErrorCode::kNotPositiveDefinite,
                                 "singular innovation covariance");
                   }
                   z(k) /= denom;
                 }
                 out.row(i) += (cross_u * z).transpose();
               });
  if (!out.allFinite()) {
    throw Error(ErrorCode::kNumerical, "EnKF update produced non-finite members");
  }
  return Ensemble(std::move(out));
}

}  // namespace

Ensemble enkf_update(const Ensemble& e, const Vector& y, const Matrix& h,
                     std::span<const double> obs_var, const RngStream& rng,
                     const UpdateOptions& opts) {
  if (h.cols() != e.dim() || h.rows() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "H must be " + std::to_string(y.size()) + "x" + std::to_string(e.dim()));
  }
  check_obs_var(obs_var, e.size());
  Matrix forecast = e.members();
  inflate(forecast, opts.inflation);
  const Matrix predicted = forecast * h.transpose();
  const GainFactors factors = gain_factors(forecast, predicted);
  return shift_members(Ensemble(std::move(forecast)), predicted, factors, y,
                       obs_var, rng, opts);
}

Ensemble enkf_update_predicted(const Ensemble& e, const Matrix& predicted,
                               const Vector& y, std::span<const double> obs_var,
                               const RngStream& rng, const UpdateOptions& opts) {
  if (predicted.rows() != e.size() || predicted.cols() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "predicted observations must be N x m");
  }
  check_obs_var(obs_var, e.size());
  Matrix forecast = e.members();
  Matrix pred = predicted;
  inflate(forecast, opts.inflation);
  inflate(pred, opts.inflation);
  const GainFactors factors = gain_factors(forecast, pred);
  return shift_members(Ensemble(std::move(forecast)), pred, factors, y, obs_var,
                       rng, opts);
}

}  // namespace menkf
