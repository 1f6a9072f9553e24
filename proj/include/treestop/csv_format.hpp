#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "treestop/error.hpp"

namespace treestop {

/// Shortest text that parses back to the same double; infinities as "inf"/"-inf".
inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Parses a full field as a double; accepts "inf", "+inf", "-inf". Throws InputError otherwise.
inline double parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double x = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InputError("not a number: '" + std::string(field) + "'");
  }
  return x;
}

}  // namespace treestop
