#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace fsel {

// Six significant digits, the precision used in every emitted report.
inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Shortest text that parses back to the same double.
inline std::string fmt17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double round6(double v) { return std::stod(fmt6(v)); }

}  // namespace fsel
