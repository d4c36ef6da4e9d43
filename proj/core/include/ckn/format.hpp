#pragma once

#include <cstdio>
#include <string>

namespace ckn {

/// Shortest-safe text for a double: 17 significant digits, round-trips exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ckn
