#pragma once

#include <string>

#include "fpl/experiments.hpp"

namespace fpl {

// A full run description: the ladder settings plus the cylinder length used
// by the single-solve commands.
struct RunConfig {
    LadderConfig ladder;
    double ell = 8.0;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Parses the key=value configuration format. Sections [problem], [mesh],
// [solver], and [ladder] group the keys; `#` starts a comment. Unknown
// sections or keys, malformed values, and a non-increasing ell_list are
// rejected with an input_error naming the line and key.
RunConfig parse_config(const std::string& text);

// Canonical serialization: parse_config(print_config(c)) == c.
std::string print_config(const RunConfig& cfg);

// Applies one `section.key=value` assignment, as given to --set.
void apply_override(RunConfig& cfg, const std::string& assignment);

} // namespace fpl
