#include "dbtalk/value.hpp"

#include <cctype>
#include <charconv>

namespace dbtalk {

namespace {

bool same_measure_group(Dimension a, Dimension b) {
  if (a == b) return true;
  auto is_len = [](Dimension d) { return d == Dimension::distance || d == Dimension::length; };
  return is_len(a) && is_len(b);
}

}  // namespace

bool MeasureVal::operator==(const MeasureVal& other) const {
  return same_measure_group(dimension, other.dimension) && si == other.si;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace dbtalk
