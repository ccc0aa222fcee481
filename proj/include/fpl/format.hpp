// Shortest-round-trip double formatting shared by descriptors and CSV output.
#pragma once

#include <charconv>
#include <string>

namespace fpl {

inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace fpl
