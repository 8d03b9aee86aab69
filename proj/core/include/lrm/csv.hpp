#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace lrm {

/// Round-trip decimal representation; identical inputs give identical bytes.
inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_number(std::ostream& os, double x) { os << format_number(x); }

}  // namespace lrm
