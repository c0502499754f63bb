#pragma once

#include <stdexcept>
#include <string>

namespace gcnfair {

enum class ErrorCode {
  invalid_argument,
  parse_error,
  out_of_range,
  dimension_mismatch,
  missing_labels,
  insufficient_non_edges,
  size_guard,
  no_convergence,
  degenerate,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` lets callers
// (and the Python layer) branch on the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gcnfair
