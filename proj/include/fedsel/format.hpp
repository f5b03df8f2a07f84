#pragma once

#include <charconv>
#include <string>

namespace fedsel {

/// Shortest decimal text that round-trips to the same double. Locale
/// independent, so CSV output is stable across machines.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

inline std::string format_fixed(double v, int precision) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace fedsel
