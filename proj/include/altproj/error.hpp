#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace altproj {

enum class ErrorCode {
  invalid_input,
  numerical_failure,
  rank_deficient,
  insufficient_data,
  degenerate_trace,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library. The code identifies the failure
/// class; numerical failures inside the driver also carry the iteration.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> iteration = std::nullopt)
      : std::runtime_error(what), code_(code), iteration_(iteration) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> iteration() const noexcept { return iteration_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> iteration_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::numerical_failure: return "numerical-failure";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::degenerate_trace: return "degenerate-trace";
  }
  return "unknown";
}

}  // namespace altproj
