#include "d3pi/csv.h"

#include <cmath>
#include <cstdio>

namespace d3pi::csv {

std::string Format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace d3pi::csv
