#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "menkf/arms.hpp"
#include "menkf/enkf.hpp"
#include "menkf/numerics.hpp"
#include "menkf/rng.hpp"

namespace menkf {

enum class VarianceInit { kGaussian, kGammaShapeScale };

struct MenkfConfig {
  std::size_t ensemble_size = 216;
  double init_var = 16.0;
  // input_dim is taken from the data; linear arms by default.
  ArmSpec arm_f{0, {}, Activation::kIdentity};
  ArmSpec arm_g{0, {}, Activation::kIdentity};
  std::size_t batch_size = 6;
  std::size_t passes = 1;
  // Variance of optional additive forecast noise; 0 keeps the transition
  // deterministic.
  double jitter_var = 0.0;
  VarianceInit variance_init = VarianceInit::kGaussian;
  bool shuffle = false;
  // Multiplicative forecast inflation; an extension, 1 disables it.
  double inflation = 1.0;
  // When set, a (resp. softplus(b)) is pinned to this value in every member
  // and never updated.
  std::optional<double> fixed_logit;
  std::optional<double> fixed_noise_var;
  std::uint64_t seed = 1;
  bool parallel = false;
  unsigned threads = 0;

  void validate() const;
  StateLayout layout() const { return StateLayout(arm_f, arm_g); }
};

struct Batch {
  Matrix features_f;  // m x p
  Matrix features_g;  // m x q
  Vector target;      // m target logits
};

/// Splits rows into contiguous batches of `batch_size`; the last partial batch
/// is kept.
std::vector<Batch> make_batches(const Matrix& features_f, const Matrix& features_g,
                                const Vector& target, std::size_t batch_size);

double sigmoid(double a);
double softplus(double b);
double inverse_softplus(double v);

/// Read-only accessors over one ensemble row. Rows of the column-major member
/// matrix are strided, so the weight getters return copies.
class MemberView {
 public:
  MemberView(const Matrix& members, Eigen::Index row, const StateLayout& layout)
      : members_(members), row_(row), layout_(layout) {}

  Vector weights_f() const;
  Vector weights_g() const;
  double logit_a() const { return at(layout_.a_index()); }
  double noise_b() const { return at(layout_.b_index()); }
  double weight_g() const { return sigmoid(logit_a()); }
  double weight_f() const { return 1.0 - weight_g(); }
  double noise_var() const { return softplus(noise_b()); }

 private:
  double at(std::size_t col) const {
    return members_(row_, static_cast<Eigen::Index>(col));
  }

  const Matrix& members_;
  Eigen::Index row_;
  const StateLayout& layout_;
};

Ensemble init_ensemble(const MenkfConfig& cfg, const StateLayout& layout,
                       const RngStream& rng);

/// Row i: (1 - sigmoid(a_i)) f(V_f, w_f_i) + sigmoid(a_i) g(V_g, w_g_i).
Matrix measure(const Matrix& members, const Matrix& features_f,
               const Matrix& features_g, const StateLayout& layout,
               const ArmSpec& arm_f, const ArmSpec& arm_g, bool parallel = false,
               unsigned threads = 0);

struct StepDiagnostics {
  double arm_weight = 0.0;       // sigmoid of the mean a after the update
  double noise_var = 0.0;        // softplus of the mean b after the update
  double innovation_norm = 0.0;  // |y - mean prediction| before the update
};

/// One forecast + analysis cycle on a batch. Nonlinear arms are handled by
/// joint sample covariances of (state, prediction). Member i uses observation
/// variance softplus(b_i).
Ensemble train_step(const Ensemble& e, const Batch& batch, const MenkfConfig& cfg,
                    const StateLayout& layout, const RngStream& rng,
                    StepDiagnostics* diagnostics = nullptr,
                    std::size_t batch_index = 0);

struct TraceRow {
  std::size_t pass = 0;
  std::size_t batch = 0;
  StepDiagnostics diagnostics;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
};

struct FitResult {
  Ensemble ensemble;
  TrainingTrace trace;
};

/// Initializes from rng.child(0), then runs train_step over the batches for
/// cfg.passes passes; step k draws from rng.child(1).child(k).
FitResult fit(std::span<const Batch> batches, const MenkfConfig& cfg,
              const RngStream& rng);

/// Continues training from an existing ensemble.
FitResult fit_from(Ensemble e, std::span<const Batch> batches,
                   const MenkfConfig& cfg, const RngStream& rng);

/// Explicit Kronecker operator G^T (x) H.
Matrix build_vec_operator(const Matrix& h, const Matrix& g);

/// For linear arms (no hidden layer, identity activation) and a fixed logit
/// a, the m x dim() matrix mapping a flat member to its batch measurement.
/// Built by lifting the member into vec(X_t) (prediction rows included) and
/// applying (G^T (x) H) with H = [I_m, 0] and G = [1, 1]^T.
Matrix linear_observation_operator(const Batch& batch, const StateLayout& layout,
                                   const ArmSpec& arm_f, const ArmSpec& arm_g,
                                   double logit_a);

}  // namespace menkf
