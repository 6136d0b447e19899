#include "menkf/error.hpp"

namespace menkf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kNotPositiveDefinite: return "matrix not positive definite";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kNumerical: return "numerical failure";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "I/O error";
  }
  return "unknown error";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> batch) {
  std::string out = std::string(to_string(code)) + ": " + message;
  if (batch) out += " (batch " + std::to_string(*batch) + ")";
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> batch)
    : std::runtime_error(decorate(code, message, batch)),
      code_(code),
      batch_(batch) {}

}  // namespace menkf
