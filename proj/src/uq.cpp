#include "menkf/uq.hpp"

#include <cmath>
#include <numeric>

#include "menkf/error.hpp"
#include "menkf/trainer.hpp"

namespace menkf {

double inverse_logit(double x) { return sigmoid(x); }

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "logit needs a probability in (0, 1)");
  }
  return std::log(p) - std::log1p(-p);
}

PointSummary summarize_draws(std::vector<double> draws, double level,
                             PointEstimator estimator) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "interval level must lie in (0, 1)");
  }
  PointSummary s;
  s.draws = std::move(draws);
  s.lo = empirical_quantile(s.draws, 0.5 * (1.0 - level));
  s.hi = empirical_quantile(s.draws, 0.5 * (1.0 + level));
  s.median = empirical_quantile(s.draws, 0.5);
  const double mean =
      std::accumulate(s.draws.begin(), s.draws.end(), 0.0) / static_cast<double>(s.draws.size());
  s.point = estimator == PointEstimator::kMean ? mean : s.median;
  s.width = s.hi - s.lo;
  return s;
}

std::vector<PointSummary> predict(const Ensemble& e, const Matrix& features_f,
                                  const Matrix& features_g, const StateLayout& layout,
                                  const ArmSpec& arm_f, const ArmSpec& arm_g,
                                  double level, PointEstimator estimator) {
  const Matrix logits = measure(e.members(), features_f, features_g, layout, arm_f, arm_g);
  std::vector<PointSummary> out;
  out.reserve(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index k = 0; k < logits.cols(); ++k) {
    std::vector<double> draws(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      draws[static_cast<std::size_t>(i)] = inverse_logit(logits(i, k));
    }
    out.push_back(summarize_draws(std::move(draws), level, estimator));
  }
  return out;
}

double coverage(std::span<const PointSummary> summaries, std::span<const double> truth) {
  if (summaries.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "coverage: " + std::to_string(summaries.size()) + " intervals vs " +
                    std::to_string(truth.size()) + " truths");
  }
  if (summaries.empty()) throw Error(ErrorCode::kEmptyInput, "coverage of no points");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (summaries[k].lo <= truth[k] && truth[k] <= summaries[k].hi) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mean_arm_weight(const Ensemble& e, const StateLayout& layout) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    total += MemberView(e.members(), i, layout).weight_g();
  }
  return total / static_cast<double>(e.size());
}

AdequacyReport adequacy(std::span<const PointSummary> summaries,
                        std::span<const double> truth, const Ensemble& e,
                        const StateLayout& layout) {
  AdequacyReport r;
  r.coverage = coverage(summaries, truth);
  r.n_test = truth.size();
  double width = 0.0;
  double abs_err = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    width += summaries[k].width;
    abs_err += std::abs(summaries[k].point - truth[k]);
  }
  r.avg_width = width / static_cast<double>(r.n_test);
  r.mae = abs_err / static_cast<double>(r.n_test);
  r.mean_arm_weight = mean_arm_weight(e, layout);
  return r;
}

}  // namespace menkf
