#include "fpl/field.hpp"

#include <ostream>

#include "fpl/format.hpp"

namespace fpl {

Field Field::zeros(const Mesh& m, bool constrained_field) {
    Field out;
    out.mesh = &m;
    out.values.assign(static_cast<std::size_t>(m.node_count), 0.0);
    out.constrained = constrained_field;
    return out;
}

void Field::enforce_constraint() {
    for (std::int64_t i = 0; i < size(); ++i) {
        if (mesh->dirichlet[static_cast<std::size_t>(i)]) values[static_cast<std::size_t>(i)] = 0.0;
    }
    constrained = true;
}

void write_field_csv(const Field& u, std::ostream& os) {
    const Mesh& m = *u.mesh;
    for (int k = 0; k < m.dim; ++k) os << (k ? "," : "") << 'x' << (k + 1);
    os << ",value\n";
    for (std::int64_t i = 0; i < m.node_count; ++i) {
        for (int k = 0; k < m.dim; ++k) os << (k ? "," : "") << fmt_double(m.node_coord(i, k));
        os << ',' << fmt_double(u[i]) << '\n';
    }
}

} // namespace fpl
