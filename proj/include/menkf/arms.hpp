#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "menkf/numerics.hpp"

namespace menkf {

enum class Activation { kIdentity, kTanh, kRelu };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

/// Dense feed-forward arm with a single output. Hidden layers use
/// `activation`; the output layer is always linear.
struct ArmSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::kTanh;

  bool operator==(const ArmSpec&) const = default;
};

/// Sum over layers of (fan_in + 1) * fan_out.
std::size_t param_count(const ArmSpec& spec);

/// Forward pass over the rows of `features` (m x input_dim).
///
/// Flat weight layout, layer by layer: the fan_in x fan_out weight matrix in
/// column-major order (column j holds the weights into unit j), followed by
/// the fan_out biases. Entries past param_count(spec) are ignored, so padded
/// vectors evaluate identically.
Vector forward(const ArmSpec& spec, std::span<const double> weights,
               const Matrix& features);

/// `weights` followed by zeros up to `target_len`.
Vector pad_weights(const Vector& weights, std::size_t target_len);

/// Flat member layout: vec of the (n_pad + 2) x 2 parameter block
///
///     [ w_f (padded)   w_g (padded) ]
///     [ 0              a            ]
///     [ 0              b            ]
///
/// i.e. column one is w_f, its padding and two structural zeros; column two
/// is w_g, its padding, the averaging logit a and the noise parameter b.
class StateLayout {
 public:
  StateLayout() = default;
  StateLayout(std::size_t n_f, std::size_t n_g);
  StateLayout(const ArmSpec& f, const ArmSpec& g);

  std::size_t n_f() const noexcept { return n_f_; }
  std::size_t n_g() const noexcept { return n_g_; }
  std::size_t n_pad() const noexcept { return n_pad_; }
  std::size_t rows() const noexcept { return n_pad_ + 2; }
  std::size_t dim() const noexcept { return 2 * (n_pad_ + 2); }

  std::size_t f_offset() const noexcept { return 0; }
  std::size_t g_offset() const noexcept { return n_pad_ + 2; }
  std::size_t a_index() const noexcept { return 2 * n_pad_ + 2; }
  std::size_t b_index() const noexcept { return 2 * n_pad_ + 3; }

  bool is_structural_zero(std::size_t i) const;
  const std::vector<std::size_t>& structural_zeros() const noexcept { return zeros_; }

  /// Writes 0 into every structural-zero column of an N x dim() matrix.
  void mask(Matrix& members) const;

 private:
  std::size_t n_f_ = 0;
  std::size_t n_g_ = 0;
  std::size_t n_pad_ = 0;
  std::vector<std::size_t> zeros_;
};

}  // namespace menkf
