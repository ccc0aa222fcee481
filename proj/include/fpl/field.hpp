#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fpl/mesh.hpp"

namespace fpl {

// Piecewise-linear nodal field on a Mesh. `values` holds one real per node in
// mesh node order. `constrained` marks fields that vanish on the mesh's
// dirichlet node set; operations that require admissible fields check it.
struct Field {
    const Mesh* mesh = nullptr;
    std::vector<double> values;
    bool constrained = false;

    static Field zeros(const Mesh& m, bool constrained_field = true);

    // Zeroes the value at every dirichlet node and sets `constrained`.
    void enforce_constraint();

    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

// Writes one row per node: the node coordinates followed by the value, full
// round-trip precision. Header row is "x1,...,xd,value".
void write_field_csv(const Field& u, std::ostream& os);

} // namespace fpl
