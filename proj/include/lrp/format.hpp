#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace lrp {

// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace lrp
