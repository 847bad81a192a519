#include "ilcfr/error.hpp"

namespace ilcfr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid parameter";
    case ErrorCode::unsupported_system: return "unsupported system";
    case ErrorCode::range_error: return "range error";
    case ErrorCode::singular_evaluation: return "singular evaluation";
    case ErrorCode::ill_conditioned_fit: return "ill-conditioned fit";
    case ErrorCode::singular_matrix: return "singular matrix";
    case ErrorCode::shape_mismatch: return "shape mismatch";
    case ErrorCode::nonsmooth_point: return "nonsmooth point";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::config_error: return "config error";
    case ErrorCode::io_error: return "i/o error";
  }
  return "unknown error";
}

}  // namespace ilcfr
