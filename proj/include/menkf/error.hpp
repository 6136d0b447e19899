#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace menkf {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotPositiveDefinite,
  kEmptyInput,
  kNumerical,
  kParse,
  kIo,
};

const char* to_string(ErrorCode code);

/// Structured error thrown by every module. `batch()` is set when the failure
/// happened inside a training step.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> batch = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> batch() const noexcept { return batch_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> batch_;
};

}  // namespace menkf
