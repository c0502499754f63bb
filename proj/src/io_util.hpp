#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gcnfair/error.hpp"

namespace gcnfair::detail {

// Round-trip-safe text for a double.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  return out;
}

}  // namespace gcnfair::detail
