#include "menkf/arms.hpp"

#include <algorithm>
#include <cmath>

#include "menkf/error.hpp"

namespace menkf {

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw Error(ErrorCode::kInvalidArgument, "unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "identity";
}

std::size_t param_count(const ArmSpec& spec) {
  std::size_t total = 0;
  std::size_t fan_in = spec.input_dim;
  for (std::size_t width : spec.hidden) {
    total += (fan_in + 1) * width;
    fan_in = width;
  }
  return total + fan_in + 1;
}

Vector forward(const ArmSpec& spec, std::span<const double> weights,
               const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != spec.input_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "arm expects " + std::to_string(spec.input_dim) +
                    " features, got " + std::to_string(features.cols()));
  }
  if (weights.size() < param_count(spec)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "arm needs " + std::to_string(param_count(spec)) +
                    " weights, got " + std::to_string(weights.size()));
  }
  using ConstMap = Eigen::Map<const Matrix>;
  using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;

  Matrix activations = features;
  std::size_t offset = 0;
  auto dense = [&](std::size_t fan_in, std::size_t fan_out) {
    const auto in = static_cast<Eigen::Index>(fan_in);
    const auto out = static_cast<Eigen::Index>(fan_out);
    ConstMap w(weights.data() + offset, in, out);
    offset += fan_in * fan_out;
    ConstRowMap bias(weights.data() + offset, out);
    offset += fan_out;
    Matrix z = activations * w;
    z.rowwise() += bias;
    return z;
  };

  std::size_t fan_in = spec.input_dim;
  for (std::size_t width : spec.hidden) {
    Matrix z = dense(fan_in, width);
    switch (spec.activation) {
      case Activation::kIdentity: break;
      case Activation::kTanh: z = z.array().tanh(); break;
      case Activation::kRelu: z = z.cwiseMax(0.0); break;
    }
    activations = std::move(z);
    fan_in = width;
  }
  return dense(fan_in, 1).col(0);
}

Vector pad_weights(const Vector& weights, std::size_t target_len) {
  const auto len = static_cast<std::size_t>(weights.size());
  if (target_len < len) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot pad " + std::to_string(len) + " weights down to " +
                    std::to_string(target_len));
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(target_len));
  out.head(weights.size()) = weights;
  return out;
}

StateLayout::StateLayout(std::size_t n_f, std::size_t n_g)
    : n_f_(n_f), n_g_(n_g), n_pad_(std::max(n_f, n_g)) {
  if (n_f == 0 || n_g == 0) {
    throw Error(ErrorCode::kInvalidArgument, "arms need at least one parameter");
  }
  for (std::size_t i = n_f_; i < n_pad_ + 2; ++i) zeros_.push_back(i);
  for (std::size_t i = g_offset() + n_g_; i < g_offset() + n_pad_; ++i) {
    zeros_.push_back(i);
  }
}

StateLayout::StateLayout(const ArmSpec& f, const ArmSpec& g)
    : StateLayout(param_count(f), param_count(g)) {}

bool StateLayout::is_structural_zero(std::size_t i) const {
  return std::binary_search(zeros_.begin(), zeros_.end(), i);
}

void StateLayout::mask(Matrix& members) const {
  if (static_cast<std::size_t>(members.cols()) != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "member width does not match layout");
  }
  for (std::size_t c : zeros_) members.col(static_cast<Eigen::Index>(c)).setZero();
}

}  // namespace menkf
