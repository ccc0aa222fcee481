// Reference implementations of the energy and its gradient, written as plain
// single-threaded scatter loops with naive accumulation and no code shared
// with the parallel kernels. They exist so tests (and the kernel benchmark)
// can compare the production assembly against an independently structured one.

#include <cmath>
#include <vector>

#include "fpl/discrete.hpp"
#include "fpl/errors.hpp"

namespace fpl {

EnergyBreakdown energy_serial(const NormSpec& norm, double p, const Field& u, const Field* f) {
    if (u.mesh == nullptr || u.size() != u.mesh->node_count)
        throw input_error("energy_serial: field does not match its mesh");
    if (!(p > 1.0)) throw parameter_error("energy_serial requires p > 1");
    const Mesh& mesh = *u.mesh;
    const int d = mesh.dim;
    const bool tagged = !mesh.inside_half.empty();

    EnergyBreakdown out;
    std::vector<std::int64_t> nodes(static_cast<std::size_t>(d) + 1);
    std::vector<double> z(static_cast<std::size_t>(d));
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        mesh.simplex_nodes(s, nodes.data());
        const double* g = mesh.simplex_grads(s);
        for (int k = 0; k < d; ++k) {
            double acc = 0.0;
            for (int v = 0; v <= d; ++v)
                acc += u.values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(v)])] * g[v * d + k];
            z[static_cast<std::size_t>(k)] = acc;
        }
        const double hv = norm_eval(norm, z);
        const double e = mesh.simplex_volume * std::pow(hv, p) / p;
        out.dirichlet_part += e;
        if (tagged && mesh.inside_half[static_cast<std::size_t>(s)]) out.dirichlet_half += e;
    }
    if (f) {
        if (f->mesh == nullptr || f->size() != f->mesh->node_count)
            throw input_error("energy_serial: load field does not match its mesh");
        const bool half_mass = !mesh.lumped_mass_half.empty();
        for (std::int64_t i = 0; i < mesh.node_count; ++i) {
            const double fv = (*f)[mesh.cross_index(i)];
            out.load_part += mesh.lumped_mass[static_cast<std::size_t>(i)] * fv * u[i];
            if (half_mass)
                out.load_half += mesh.lumped_mass_half[static_cast<std::size_t>(i)] * fv * u[i];
        }
    }
    out.total = out.dirichlet_part - out.load_part;
    out.total_half = out.dirichlet_half - out.load_half;
    return out;
}

bool try_energy_gradient_serial(const NormSpec& norm, double p, const Field& u, const Field* f,
                                Field& out) {
    if (u.mesh == nullptr || u.size() != u.mesh->node_count)
        throw input_error("try_energy_gradient_serial: field does not match its mesh");
    if (!(p > 1.0)) throw parameter_error("try_energy_gradient_serial requires p > 1");
    const Mesh& mesh = *u.mesh;
    const int d = mesh.dim;

    out = Field::zeros(mesh);
    std::vector<std::int64_t> nodes(static_cast<std::size_t>(d) + 1);
    std::vector<double> z(static_cast<std::size_t>(d));
    std::vector<double> q(static_cast<std::size_t>(d));
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        mesh.simplex_nodes(s, nodes.data());
        const double* g = mesh.simplex_grads(s);
        for (int k = 0; k < d; ++k) {
            double acc = 0.0;
            for (int v = 0; v <= d; ++v)
                acc += u.values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(v)])] * g[v * d + k];
            z[static_cast<std::size_t>(k)] = acc;
        }
        if (!try_flux(norm, p, z.data(), q.data())) return false;
        for (int v = 0; v <= d; ++v) {
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += q[static_cast<std::size_t>(k)] * g[v * d + k];
            out[nodes[static_cast<std::size_t>(v)]] += mesh.simplex_volume * dot;
        }
    }
    for (std::int64_t i = 0; i < mesh.node_count; ++i) {
        if (mesh.dirichlet[static_cast<std::size_t>(i)]) {
            out[i] = 0.0;
        } else if (f) {
            out[i] -= mesh.lumped_mass[static_cast<std::size_t>(i)] * (*f)[mesh.cross_index(i)];
        }
    }
    return true;
}

} // namespace fpl
