#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "stark/errors.hpp"

namespace stark {

// Shortest decimal that round-trips to the same double. Non-finite values
// come out as "inf", "-inf", "nan".
inline std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Strict full-string parse; accepts the format_double spellings.
inline double parse_double(std::string_view s) {
  double x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArguments("cannot parse number '" + std::string(s) + "'");
  return x;
}

inline long long parse_int(std::string_view s) {
  long long x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArguments("cannot parse integer '" + std::string(s) + "'");
  return x;
}

} // namespace stark
