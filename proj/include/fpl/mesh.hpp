// Tensor-product simplicial meshes of box cylinders and their cross-sections.
//
// A cylinder of length ell is the box (-ell/2, ell/2)^m x cross_box. Each grid
// cell is cut into d! simplices sharing the cell's main diagonal (one simplex
// per ordering of the coordinate steps), so piecewise-linear fields have one
// constant gradient per simplex and all simplex volumes are equal.
//
// Node ordering is mixed-radix with the axis dimensions varying fastest: the
// nodes of one axis line are contiguous, and the cross-section index of any
// node is a single integer division. Cross-section meshes are the same type
// with axis_dim == 0, and their node layout matches the cross slice of any
// cylinder built from the same cross box and step, coordinate for coordinate.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fpl {

enum class BoundaryMode {
    AllBoundary, // constrained on the entire box boundary
    StripOnly,   // constrained on axis x (boundary of cross box); axis ends free
};

struct Mesh {
    int dim = 0;      // total space dimension
    int axis_dim = 0; // leading axis dimensions (0 for a cross-section mesh)
    double length = 0.0;
    BoundaryMode boundary_mode = BoundaryMode::AllBoundary;
    std::vector<int> counts;    // nodes per dimension
    std::vector<double> h;      // effective step per dimension
    std::vector<double> origin; // low corner per dimension

    std::int64_t node_count = 0;
    std::int64_t cell_count = 0;
    int perm_count = 0; // dim!
    std::int64_t simplex_count = 0;
    double simplex_volume = 0.0; // uniform across the mesh

    std::vector<std::int64_t> node_stride; // per dimension
    std::vector<std::int64_t> cell_corner; // low-corner node of each cell
    // Per-permutation tables, local vertex count = dim+1 per simplex.
    // Vertex order is chosen so every simplex has positive orientation.
    std::vector<std::int64_t> vertex_offset; // perm_count x (dim+1), node-id offsets
    std::vector<double> grad_table;          // perm_count x (dim+1) x dim, basis gradients

    std::vector<unsigned char> dirichlet;   // per node
    std::vector<unsigned char> inside_half; // per simplex (empty when axis_dim == 0)

    // node -> incident (simplex, local vertex), CSR, simplex-ascending per node
    std::vector<std::int64_t> adj_start; // node_count + 1
    std::vector<std::int64_t> adj_simplex;
    std::vector<std::int8_t> adj_local;

    std::vector<double> lumped_mass;      // per node, whole mesh
    std::vector<double> lumped_mass_half; // per node, inside_half region only

    double node_coord(std::int64_t node, int k) const;
    void simplex_nodes(std::int64_t s, std::int64_t* out) const; // dim+1 ids
    const double* simplex_grads(std::int64_t s) const; // (dim+1) rows of dim entries
    std::int64_t axis_node_count() const;  // product of axis-dimension counts
    std::int64_t cross_node_count() const; // product of cross-dimension counts
    std::int64_t cross_index(std::int64_t node) const;
    std::int64_t interior_node_count() const;
    std::int64_t dirichlet_count() const;
    double total_volume() const;
    double half_volume() const; // volume of the flagged region
};

// Cylinder (-ell/2, ell/2)^m x cross_box with steps h_axis / h_cross. Node
// counts per dimension are round(edge/h) + 1 and the stored step is the edge
// divided by the resulting cell count.
Mesh build_cylinder(double ell, int m, const std::vector<std::pair<double, double>>& cross_box,
                    double h_axis, double h_cross,
                    BoundaryMode mode = BoundaryMode::AllBoundary);

Mesh build_cross_section(const std::vector<std::pair<double, double>>& cross_box, double h_cross);

// (Re)compute the half-cylinder flags: a simplex is flagged exactly when its
// closure lies in the centered half-length box; also refreshes the half-region
// lumped masses. Idempotent.
void tag_half_cylinder(Mesh& mesh);

// Plain-text summary (counts, volumes, steps) for golden-file comparisons.
std::string mesh_summary(const Mesh& mesh);

} // namespace fpl
