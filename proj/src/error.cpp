#include "gcnfair/error.hpp"

namespace gcnfair {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::missing_labels: return "missing_labels";
    case ErrorCode::insufficient_non_edges: return "insufficient_non_edges";
    case ErrorCode::size_guard: return "size_guard";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace gcnfair
