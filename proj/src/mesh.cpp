#include "fpl/mesh.hpp"

#include "fpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fpl {

namespace {

constexpr int kMaxMeshDim = 5;

int factorial(int d) {
    int f = 1;
    for (int k = 2; k <= d; ++k)
        f *= k;
    return f;
}

bool parity_odd(const std::vector<int>& perm) {
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j])
                ++inversions;
    return (inversions % 2) != 0;
}

// Walk the cell's main diagonal in the order given by perm; vertex j sits at
// the low corner plus the first j permuted coordinate steps. The barycentric
// basis on that simplex is lambda_0 = 1 - t_0, lambda_j = t_{j-1} - t_j,
// lambda_d = t_{d-1} with t_k the (scaled) coordinate along perm[k].
void build_perm_tables(Mesh& mesh) {
    const int d = mesh.dim;
    const int nv = d + 1;
    mesh.perm_count = factorial(d);
    mesh.vertex_offset.assign(static_cast<std::size_t>(mesh.perm_count) * nv, 0);
    mesh.grad_table.assign(static_cast<std::size_t>(mesh.perm_count) * nv * d, 0.0);

    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    int pid = 0;
    do {
        std::int64_t* vo = mesh.vertex_offset.data() + static_cast<std::ptrdiff_t>(pid) * nv;
        double* gt = mesh.grad_table.data() + static_cast<std::ptrdiff_t>(pid) * nv * d;

        std::int64_t acc = 0;
        vo[0] = 0;
        for (int j = 1; j <= d; ++j) {
            acc += mesh.node_stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(j - 1)])];
            vo[j] = acc;
        }
        auto grad_row = [&](int v) { return gt + static_cast<std::ptrdiff_t>(v) * d; };
        {
            const int k0 = perm[0];
            grad_row(0)[k0] = -1.0 / mesh.h[static_cast<std::size_t>(k0)];
        }
        for (int j = 1; j < d; ++j) {
            const int ka = perm[static_cast<std::size_t>(j - 1)];
            const int kb = perm[static_cast<std::size_t>(j)];
            grad_row(j)[ka] = 1.0 / mesh.h[static_cast<std::size_t>(ka)];
            grad_row(j)[kb] += -1.0 / mesh.h[static_cast<std::size_t>(kb)];
        }
        {
            const int kd = perm[static_cast<std::size_t>(d - 1)];
            grad_row(d)[kd] = 1.0 / mesh.h[static_cast<std::size_t>(kd)];
        }
        if (parity_odd(perm)) {
            // swap local vertices 0 and 1 so the signed volume is positive
            std::swap(vo[0], vo[1]);
            for (int k = 0; k < d; ++k)
                std::swap(grad_row(0)[k], grad_row(1)[k]);
        }
        ++pid;
    } while (std::next_permutation(perm.begin(), perm.end()));
}

void build_topology(Mesh& mesh) {
    const int d = mesh.dim;
    mesh.node_stride.assign(static_cast<std::size_t>(d), 1);
    mesh.node_count = 1;
    mesh.cell_count = 1;
    for (int k = 0; k < d; ++k) {
        mesh.node_stride[static_cast<std::size_t>(k)] = mesh.node_count;
        mesh.node_count *= mesh.counts[static_cast<std::size_t>(k)];
        mesh.cell_count *= mesh.counts[static_cast<std::size_t>(k)] - 1;
    }
    build_perm_tables(mesh);
    mesh.simplex_count = mesh.cell_count * mesh.perm_count;
    double cellvol = 1.0;
    for (int k = 0; k < d; ++k)
        cellvol *= mesh.h[static_cast<std::size_t>(k)];
    mesh.simplex_volume = cellvol / mesh.perm_count;

    // low-corner node of each cell, mixed radix odometer over cell counts
    mesh.cell_corner.assign(static_cast<std::size_t>(mesh.cell_count), 0);
    std::vector<int> c(static_cast<std::size_t>(d), 0);
    std::int64_t corner = 0;
    for (std::int64_t cell = 0; cell < mesh.cell_count; ++cell) {
        mesh.cell_corner[static_cast<std::size_t>(cell)] = corner;
        for (int k = 0; k < d; ++k) {
            corner += mesh.node_stride[static_cast<std::size_t>(k)];
            if (++c[static_cast<std::size_t>(k)] < mesh.counts[static_cast<std::size_t>(k)] - 1)
                break;
            corner -= static_cast<std::int64_t>(c[static_cast<std::size_t>(k)]) *
                      mesh.node_stride[static_cast<std::size_t>(k)];
            c[static_cast<std::size_t>(k)] = 0;
        }
    }

    // boundary flags
    mesh.dirichlet.assign(static_cast<std::size_t>(mesh.node_count), 0);
    const int first_checked = mesh.boundary_mode == BoundaryMode::StripOnly ? mesh.axis_dim : 0;
    for (std::int64_t nid = 0; nid < mesh.node_count; ++nid) {
        std::int64_t rest = nid;
        for (int k = 0; k < d; ++k) {
            const int i = static_cast<int>(rest % mesh.counts[static_cast<std::size_t>(k)]);
            rest /= mesh.counts[static_cast<std::size_t>(k)];
            if (k >= first_checked && (i == 0 || i == mesh.counts[static_cast<std::size_t>(k)] - 1)) {
                mesh.dirichlet[static_cast<std::size_t>(nid)] = 1;
                break;
            }
        }
    }

    // node -> (simplex, local vertex) adjacency, CSR, filled in simplex order
    const int nv = d + 1;
    mesh.adj_start.assign(static_cast<std::size_t>(mesh.node_count) + 1, 0);
    std::vector<std::int64_t> vids(static_cast<std::size_t>(nv));
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        mesh.simplex_nodes(s, vids.data());
        for (int v = 0; v < nv; ++v)
            ++mesh.adj_start[static_cast<std::size_t>(vids[static_cast<std::size_t>(v)]) + 1];
    }
    for (std::int64_t nid = 0; nid < mesh.node_count; ++nid)
        mesh.adj_start[static_cast<std::size_t>(nid) + 1] +=
            mesh.adj_start[static_cast<std::size_t>(nid)];
    mesh.adj_simplex.assign(static_cast<std::size_t>(mesh.simplex_count) * nv, 0);
    mesh.adj_local.assign(static_cast<std::size_t>(mesh.simplex_count) * nv, 0);
    std::vector<std::int64_t> cursor(mesh.adj_start.begin(), mesh.adj_start.end() - 1);
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        mesh.simplex_nodes(s, vids.data());
        for (int v = 0; v < nv; ++v) {
            const std::int64_t pos = cursor[static_cast<std::size_t>(vids[static_cast<std::size_t>(v)])]++;
            mesh.adj_simplex[static_cast<std::size_t>(pos)] = s;
            mesh.adj_local[static_cast<std::size_t>(pos)] = static_cast<std::int8_t>(v);
        }
    }

    // lumped masses: each simplex spreads its volume evenly over its vertices
    mesh.lumped_mass.assign(static_cast<std::size_t>(mesh.node_count), 0.0);
    const double share = mesh.simplex_volume / nv;
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        mesh.simplex_nodes(s, vids.data());
        for (int v = 0; v < nv; ++v)
            mesh.lumped_mass[static_cast<std::size_t>(vids[static_cast<std::size_t>(v)])] += share;
    }
}

int node_count_for(double edge, double step, const char* what) {
    if (!(edge > 0.0))
        throw input_error(std::string(what) + ": edge must be positive");
    if (!(step > 0.0))
        throw input_error(std::string(what) + ": step must be positive");
    const int cells = static_cast<int>(std::llround(edge / step));
    if (cells < 1)
        throw input_error(std::string(what) + ": step larger than the edge");
    return cells + 1;
}

} // namespace

double Mesh::node_coord(std::int64_t node, int k) const {
    const std::int64_t i =
        (node / node_stride[static_cast<std::size_t>(k)]) % counts[static_cast<std::size_t>(k)];
    return origin[static_cast<std::size_t>(k)] +
           static_cast<double>(i) * h[static_cast<std::size_t>(k)];
}

void Mesh::simplex_nodes(std::int64_t s, std::int64_t* out) const {
    const std::int64_t cell = s / perm_count;
    const int perm = static_cast<int>(s % perm_count);
    const std::int64_t corner = cell_corner[static_cast<std::size_t>(cell)];
    const std::int64_t* vo = vertex_offset.data() + static_cast<std::ptrdiff_t>(perm) * (dim + 1);
    for (int v = 0; v <= dim; ++v)
        out[v] = corner + vo[v];
}

const double* Mesh::simplex_grads(std::int64_t s) const {
    const int perm = static_cast<int>(s % perm_count);
    return grad_table.data() + static_cast<std::ptrdiff_t>(perm) * (dim + 1) * dim;
}

std::int64_t Mesh::axis_node_count() const {
    std::int64_t n = 1;
    for (int k = 0; k < axis_dim; ++k)
        n *= counts[static_cast<std::size_t>(k)];
    return n;
}

std::int64_t Mesh::cross_node_count() const {
    std::int64_t n = 1;
    for (int k = axis_dim; k < dim; ++k)
        n *= counts[static_cast<std::size_t>(k)];
    return n;
}

std::int64_t Mesh::cross_index(std::int64_t node) const { return node / axis_node_count(); }

std::int64_t Mesh::interior_node_count() const { return node_count - dirichlet_count(); }

std::int64_t Mesh::dirichlet_count() const {
    std::int64_t n = 0;
    for (unsigned char f : dirichlet)
        n += f;
    return n;
}

double Mesh::total_volume() const {
    return static_cast<double>(simplex_count) * simplex_volume;
}

double Mesh::half_volume() const {
    std::int64_t n = 0;
    for (unsigned char f : inside_half)
        n += f;
    return static_cast<double>(n) * simplex_volume;
}

Mesh build_cylinder(double ell, int m, const std::vector<std::pair<double, double>>& cross_box,
                    double h_axis, double h_cross, BoundaryMode mode) {
    if (!(ell > 0.0))
        throw input_error("build_cylinder: length must be positive");
    if (m < 1)
        throw input_error("build_cylinder: axis dimension must be at least 1");
    if (cross_box.empty())
        throw input_error("build_cylinder: cross box must have at least one interval");
    const int d = m + static_cast<int>(cross_box.size());
    if (d > kMaxMeshDim)
        throw input_error("build_cylinder: total dimension too large");

    Mesh mesh;
    mesh.dim = d;
    mesh.axis_dim = m;
    mesh.length = ell;
    mesh.boundary_mode = mode;
    mesh.counts.resize(static_cast<std::size_t>(d));
    mesh.h.resize(static_cast<std::size_t>(d));
    mesh.origin.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < m; ++k) {
        const int n = node_count_for(ell, h_axis, "build_cylinder axis");
        mesh.counts[static_cast<std::size_t>(k)] = n;
        mesh.h[static_cast<std::size_t>(k)] = ell / (n - 1);
        mesh.origin[static_cast<std::size_t>(k)] = -ell / 2.0;
    }
    for (std::size_t c = 0; c < cross_box.size(); ++c) {
        const auto [a, b] = cross_box[c];
        if (!(b > a))
            throw input_error("build_cylinder: cross interval must have positive width");
        const int n = node_count_for(b - a, h_cross, "build_cylinder cross");
        mesh.counts[static_cast<std::size_t>(m) + c] = n;
        mesh.h[static_cast<std::size_t>(m) + c] = (b - a) / (n - 1);
        mesh.origin[static_cast<std::size_t>(m) + c] = a;
    }
    build_topology(mesh);
    tag_half_cylinder(mesh);
    return mesh;
}

Mesh build_cross_section(const std::vector<std::pair<double, double>>& cross_box,
                         double h_cross) {
    if (cross_box.empty())
        throw input_error("build_cross_section: cross box must have at least one interval");
    const int d = static_cast<int>(cross_box.size());
    if (d > kMaxMeshDim)
        throw input_error("build_cross_section: dimension too large");

    Mesh mesh;
    mesh.dim = d;
    mesh.axis_dim = 0;
    mesh.length = 0.0;
    mesh.boundary_mode = BoundaryMode::AllBoundary;
    mesh.counts.resize(static_cast<std::size_t>(d));
    mesh.h.resize(static_cast<std::size_t>(d));
    mesh.origin.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        const auto [a, b] = cross_box[static_cast<std::size_t>(k)];
        if (!(b > a))
            throw input_error("build_cross_section: interval must have positive width");
        const int n = node_count_for(b - a, h_cross, "build_cross_section");
        mesh.counts[static_cast<std::size_t>(k)] = n;
        mesh.h[static_cast<std::size_t>(k)] = (b - a) / (n - 1);
        mesh.origin[static_cast<std::size_t>(k)] = a;
    }
    build_topology(mesh);
    return mesh;
}

void tag_half_cylinder(Mesh& mesh) {
    if (mesh.axis_dim == 0) {
        mesh.inside_half.clear();
        mesh.lumped_mass_half.clear();
        return;
    }
    mesh.inside_half.assign(static_cast<std::size_t>(mesh.simplex_count), 0);
    const double bound = mesh.length / 4.0;
    const double tol = 1e-12 * std::max(1.0, mesh.length);

    // Each cell's simplices share the cell's low and high corners (the main
    // diagonal), so closure containment is a per-cell test on the axis span.
    std::vector<int> c(static_cast<std::size_t>(mesh.dim), 0);
    for (std::int64_t cell = 0; cell < mesh.cell_count; ++cell) {
        bool inside = true;
        for (int k = 0; k < mesh.axis_dim && inside; ++k) {
            const double lo = mesh.origin[static_cast<std::size_t>(k)] +
                              c[static_cast<std::size_t>(k)] * mesh.h[static_cast<std::size_t>(k)];
            const double hi = lo + mesh.h[static_cast<std::size_t>(k)];
            inside = lo >= -bound - tol && hi <= bound + tol;
        }
        if (inside) {
            for (int pid = 0; pid < mesh.perm_count; ++pid)
                mesh.inside_half[static_cast<std::size_t>(cell * mesh.perm_count + pid)] = 1;
        }
        for (int k = 0; k < mesh.dim; ++k) {
            if (++c[static_cast<std::size_t>(k)] < mesh.counts[static_cast<std::size_t>(k)] - 1)
                break;
            c[static_cast<std::size_t>(k)] = 0;
        }
    }

    mesh.lumped_mass_half.assign(static_cast<std::size_t>(mesh.node_count), 0.0);
    const int nv = mesh.dim + 1;
    const double share = mesh.simplex_volume / nv;
    std::vector<std::int64_t> vids(static_cast<std::size_t>(nv));
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        if (!mesh.inside_half[static_cast<std::size_t>(s)])
            continue;
        mesh.simplex_nodes(s, vids.data());
        for (int v = 0; v < nv; ++v)
            mesh.lumped_mass_half[static_cast<std::size_t>(vids[static_cast<std::size_t>(v)])] +=
                share;
    }
}

std::string mesh_summary(const Mesh& mesh) {
    std::ostringstream os;
    os << "dim " << mesh.dim << "\n";
    os << "axis_dim " << mesh.axis_dim << "\n";
    os << "counts";
    for (int n : mesh.counts)
        os << " " << n;
    os << "\n";
    os << "nodes " << mesh.node_count << "\n";
    os << "cells " << mesh.cell_count << "\n";
    os << "simplices " << mesh.simplex_count << "\n";
    os << "dirichlet " << mesh.dirichlet_count() << "\n";
    os << "volume " << mesh.total_volume() << "\n";
    if (mesh.axis_dim > 0)
        os << "half_volume " << mesh.half_volume() << "\n";
    return os.str();
}

} // namespace fpl
