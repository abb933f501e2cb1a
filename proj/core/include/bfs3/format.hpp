#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace bfs3 {

/// Shortest round-trip decimal form; stable across runs and locales.
inline std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

/// Fixed-point with the given number of decimals.
inline std::string format_fixed(double x, int decimals) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace bfs3
