#include "menkf/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "menkf/error.hpp"
#include "menkf/parallel.hpp"
#include "menkf/uq.hpp"

namespace menkf {

Scenario parse_scenario(const std::string& name) {
  if (name == "well_specified") return Scenario::kWellSpecified;
  if (name == "misspecified") return Scenario::kMisspecified;
  if (name == "stacked_average") return Scenario::kStackedAverage;
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kWellSpecified: return "well_specified";
    case Scenario::kMisspecified: return "misspecified";
    case Scenario::kStackedAverage: return "stacked_average";
  }
  return "well_specified";
}

void SimConfig::validate() const {
  if (points < 1) throw Error(ErrorCode::kInvalidArgument, "points must be positive");
  if (!(perturb_sd >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "perturb_sd must be non-negative");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1)");
  }
  if (dim_f < 1 || dim_g < 1 || latent_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "dimensions must be positive");
  }
  if (!(surrogate_sd >= 0.0) || !(latent_noise_g >= 0.0) || !(feature_noise >= 0.0) ||
      !(logit_sd > 0.0) || !(embedding_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise scales must be non-negative");
  }
}

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double sd, RngStream& rng) {
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = sd * rng.normal();
  }
  return out;
}

// Reference embedding: tanh(latent * loading + noise), entries in (-1, 1) like
// the hidden state of a recurrent encoder.
Matrix embed(const Matrix& latent, std::size_t dim, double noise, RngStream& rng) {
  const auto k = latent.cols();
  const Matrix loading =
      gaussian(k, static_cast<Eigen::Index>(dim), 1.0 / std::sqrt(static_cast<double>(k)), rng);
  const Matrix pre =
      latent * loading + gaussian(latent.rows(), static_cast<Eigen::Index>(dim), noise, rng);
  return pre.array().tanh();
}

// Linear read-out layer of the reference network on top of its embedding,
// standardized to mean 0 and sd `logit_sd` over the sample.
Vector readout_logits(const Matrix& embedding, double logit_sd, RngStream& rng) {
  const Vector beta = gaussian(embedding.cols(), 1, 1.0, rng);
  Vector out = embedding * beta;
  out.array() -= out.mean();
  const double sd = std::sqrt(out.squaredNorm() / static_cast<double>(out.size()));
  if (sd > 0.0) out *= logit_sd / sd;
  return out;
}

}  // namespace

BaseData gen_base_probs(const SimConfig& cfg, const RngStream& rng) {
  cfg.validate();
  const auto m = static_cast<Eigen::Index>(cfg.points);
  RngStream latent_rng = rng.child(0);
  RngStream embed_rng = rng.child(1);
  RngStream ref_rng = rng.child(2);
  RngStream swap_rng = rng.child(3);

  const Matrix latent = gaussian(m, static_cast<Eigen::Index>(cfg.latent_dim), 1.0, latent_rng);
  const Matrix latent_g =
      latent + gaussian(m, latent.cols(), cfg.latent_noise_g, latent_rng);

  BaseData base;
  base.features_f = embed(latent, cfg.dim_f, cfg.feature_noise, embed_rng);
  base.features_g = embed(latent_g, cfg.dim_g, cfg.feature_noise, embed_rng);
  base.true_logit = readout_logits(base.features_f, cfg.logit_sd, ref_rng);

  if (cfg.scenario == Scenario::kStackedAverage) {
    const Vector logit_g = readout_logits(base.features_g, cfg.logit_sd, ref_rng);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double avg = 0.5 * (inverse_logit(base.true_logit(i)) + inverse_logit(logit_g(i)));
      base.true_logit(i) = logit(avg);
    }
  }
  if (cfg.scenario == Scenario::kMisspecified) {
    // An embedding with the same construction and shape, driven by a latent
    // signal independent of the one behind the targets.
    const Matrix unrelated =
        gaussian(m, static_cast<Eigen::Index>(cfg.latent_dim), 1.0, swap_rng);
    base.features_f = embed(unrelated, cfg.dim_f, cfg.feature_noise, swap_rng);
  }
  base.features_f *= cfg.embedding_scale;
  base.features_g *= cfg.embedding_scale;
  base.true_prob = base.true_logit.unaryExpr([](double x) { return inverse_logit(x); });
  return base;
}

double perturb_logit(double true_logit, double eps) { return true_logit + eps; }

int threshold_label(double prob, double threshold) { return prob > threshold ? 1 : 0; }

std::vector<Dataset> gen_replicates(const SimConfig& cfg, const BaseData& base,
                                    const RngStream& rng, bool parallel, unsigned threads) {
  cfg.validate();
  std::vector<Dataset> out(cfg.replicates);
  const Eigen::Index m = base.true_logit.size();
  parallel_for(cfg.replicates, parallel, threads, [&](std::size_t j) {
    RngStream rep_rng = rng.child(j);
    RngStream label_rng = rep_rng.child(0);
    RngStream target_rng = rep_rng.child(1);
    Dataset d;
    d.features_f = base.features_f;
    d.features_g = base.features_g;
    d.true_prob = base.true_prob;
    d.target_logit.resize(m);
    d.labels.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      const double perturbed = perturb_logit(base.true_logit(i), cfg.perturb_sd * label_rng.normal());
      d.labels[static_cast<std::size_t>(i)] =
          threshold_label(inverse_logit(perturbed), cfg.threshold);
      d.target_logit(i) = perturbed + cfg.surrogate_sd * target_rng.normal();
    }
    out[j] = std::move(d);
  });
  return out;
}

Dataset select_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Dataset out;
  out.features_f.resize(n, data.features_f.cols());
  out.features_g.resize(n, data.features_g.cols());
  out.target_logit.resize(n);
  if (data.true_prob.size() > 0) out.true_prob.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    out.features_f.row(k) = data.features_f.row(r);
    out.features_g.row(k) = data.features_g.row(r);
    out.target_logit(k) = data.target_logit(r);
    if (data.true_prob.size() > 0) out.true_prob(k) = data.true_prob(r);
    if (!data.labels.empty()) out.labels.push_back(data.labels[static_cast<std::size_t>(r)]);
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t train_n,
                                  std::size_t test_n, RngStream& rng) {
  const auto m = static_cast<std::size_t>(data.size());
  if (train_n + test_n > m) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot split " + std::to_string(m) + " rows into " +
                    std::to_string(train_n) + " + " + std::to_string(test_n));
  }
  std::vector<Eigen::Index> idx(m);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  std::vector<Eigen::Index> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_n));
  std::vector<Eigen::Index> test(idx.begin() + static_cast<std::ptrdiff_t>(train_n),
                                 idx.begin() + static_cast<std::ptrdiff_t>(train_n + test_n));
  return {select_rows(data, train), select_rows(data, test)};
}

double linear_probe_r2(const Matrix& features, const Vector& target) {
  const Eigen::Index n = features.rows();
  const Eigen::Index k = features.cols();
  if (n != target.size()) throw Error(ErrorCode::kDimensionMismatch, "probe row mismatch");
  if (n <= k + 1) throw Error(ErrorCode::kInvalidArgument, "probe needs more rows than columns");
  Matrix design(n, k + 1);
  design << Matrix::Ones(n, 1), features;
  const Vector beta = design.colPivHouseholderQr().solve(target);
  const double ssr = (target - design * beta).squaredNorm();
  const double sst = (target.array() - target.mean()).matrix().squaredNorm();
  const double r2 = 1.0 - ssr / sst;
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - k - 1);
}

}  // namespace menkf
