#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "menkf/numerics.hpp"
#include "menkf/rng.hpp"

namespace menkf {

enum class Scenario { kWellSpecified, kMisspecified, kStackedAverage };

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario s);

struct SimConfig {
  std::size_t points = 74;
  std::size_t replicates = 50;
  double perturb_sd = 0.01;
  double threshold = 0.5;
  std::size_t dim_f = 32;
  std::size_t dim_g = 32;
  Scenario scenario = Scenario::kWellSpecified;
  std::uint64_t seed = 1;
  // Logit-scale noise standing in for the fitted surrogate's deviation from
  // the true probabilities.
  double surrogate_sd = 0.05;
  // Dimension of the shared latent signal behind both embeddings.
  std::size_t latent_dim = 4;
  // Noise added to the latent signal before it is embedded for arm g.
  double latent_noise_g = 1.0;
  // Noise added to the embedding pre-activations.
  double feature_noise = 0.05;
  // Multiplies both embeddings after the true logits are computed.
  double embedding_scale = 0.1;
  // Standard deviation the true logits are rescaled to.
  double logit_sd = 1.5;

  void validate() const;
};

/// Embeddings shared by all replicates plus the true probabilities that
/// generate labels (for kStackedAverage, the averaged probability).
struct BaseData {
  Matrix features_f;
  Matrix features_g;
  Vector true_logit;
  Vector true_prob;
};

struct Dataset {
  Matrix features_f;
  Matrix features_g;
  Vector target_logit;
  Vector true_prob;          // may be empty when unknown
  std::vector<int> labels;   // may be empty when unknown

  Eigen::Index size() const { return target_logit.size(); }
};

BaseData gen_base_probs(const SimConfig& cfg, const RngStream& rng);

/// logit(p_tilde) = logit(p_hat) + eps, eps ~ N(0, sd^2).
double perturb_logit(double true_logit, double eps);

/// Strict indicator p > threshold.
int threshold_label(double prob, double threshold);

/// Replicate j draws from rng.child(j); `parallel` only changes scheduling.
std::vector<Dataset> gen_replicates(const SimConfig& cfg, const BaseData& base,
                                    const RngStream& rng, bool parallel = false,
                                    unsigned threads = 0);

/// Uniform subsample without replacement: train_n rows, then test_n disjoint
/// rows.
std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t train_n,
                                  std::size_t test_n, RngStream& rng);

Dataset select_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

/// Adjusted R^2 of an ordinary least-squares fit (with intercept) of target
/// on the columns of features.
double linear_probe_r2(const Matrix& features, const Vector& target);

}  // namespace menkf
