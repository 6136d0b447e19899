#pragma once

#include <span>
#include <vector>

#include "menkf/arms.hpp"
#include "menkf/enkf.hpp"
#include "menkf/numerics.hpp"

namespace menkf {

enum class PointEstimator { kMean, kMedian };

/// Ensemble predictive distribution at one input, on the probability scale.
struct PointSummary {
  std::vector<double> draws;  // one inverse-logit prediction per member
  double point = 0.0;
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
};

struct AdequacyReport {
  double coverage = 0.0;
  double avg_width = 0.0;
  double mae = 0.0;
  // Mean sigmoid(a): the weight of arm g. Arm f receives 1 - this.
  double mean_arm_weight = 0.0;
  std::size_t n_test = 0;
};

double inverse_logit(double x);
double logit(double p);

/// Summarizes member draws: lo/hi are the (1-level)/2 and (1+level)/2
/// empirical quantiles.
PointSummary summarize_draws(std::vector<double> draws, double level = 0.95,
                             PointEstimator estimator = PointEstimator::kMean);

std::vector<PointSummary> predict(const Ensemble& e, const Matrix& features_f,
                                  const Matrix& features_g, const StateLayout& layout,
                                  const ArmSpec& arm_f, const ArmSpec& arm_g,
                                  double level = 0.95,
                                  PointEstimator estimator = PointEstimator::kMean);

/// Fraction of closed intervals [lo, hi] that contain the truth.
double coverage(std::span<const PointSummary> summaries, std::span<const double> truth);

double mean_arm_weight(const Ensemble& e, const StateLayout& layout);

AdequacyReport adequacy(std::span<const PointSummary> summaries,
                        std::span<const double> truth, const Ensemble& e,
                        const StateLayout& layout);

}  // namespace menkf
