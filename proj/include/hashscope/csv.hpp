#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>

namespace hashscope::csv {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

inline std::string field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace hashscope::csv
