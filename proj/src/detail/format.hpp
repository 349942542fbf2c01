#ifndef HANKEL_DETAIL_FORMAT_HPP
#define HANKEL_DETAIL_FORMAT_HPP

#include <cstdio>
#include <string>

namespace hankel::detail {

/// Round-trip-safe decimal form.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace hankel::detail

#endif
