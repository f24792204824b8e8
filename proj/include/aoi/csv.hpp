#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace aoi {

/// Shortest text that parses back to the same double; NaN becomes an empty
/// field.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace aoi
