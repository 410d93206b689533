#ifndef RETFLOW_NUMFMT_HPP
#define RETFLOW_NUMFMT_HPP

#include <charconv>
#include <string>

namespace retflow {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace retflow

#endif
