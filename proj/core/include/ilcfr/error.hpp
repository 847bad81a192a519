#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ilcfr {

enum class ErrorCode {
  invalid_parameter,
  unsupported_system,
  range_error,
  singular_evaluation,
  ill_conditioned_fit,
  singular_matrix,
  shape_mismatch,
  nonsmooth_point,
  divergence,
  config_error,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace ilcfr
