#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace qmclab {

// Shortest round-trip decimal rendering; deterministic across runs and
// platforms with IEEE doubles ("nan"/"inf" spelled out).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace qmclab
