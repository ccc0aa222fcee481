#pragma once

#include <stdexcept>
#include <string>

namespace fpl {

// Bad user-facing input: dimensions, descriptors, config files, field shapes.
struct input_error : std::invalid_argument {
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// Parameter outside the supported range (p <= 1, q < 1, ...).
struct parameter_error : std::invalid_argument {
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// Exact-mode derivative query on a point where the norm is not differentiable.
struct singular_point_error : std::domain_error {
    explicit singular_point_error(const std::string& what) : std::domain_error(what) {}
};

} // namespace fpl
