#pragma once

#include <ostream>
#include <string>

namespace d3pi::csv {

/// 17 significant digits: every double round-trips exactly.
std::string Format(double v);

inline void Field(std::ostream& out, double v) { out << Format(v); }

}  // namespace d3pi::csv
