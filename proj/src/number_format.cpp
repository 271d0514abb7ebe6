#include "stlmpc/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace stlmpc {

namespace {

std::string special(double v) {
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string shortest_repr(double v) {
  if (!std::isfinite(v)) return special(v);
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string significant_repr(double v, int digits) {
  if (!std::isfinite(v)) return special(v);
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.*g", digits, v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

}  // namespace stlmpc
