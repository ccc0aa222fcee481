#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpl/field.hpp"
#include "fpl/mesh.hpp"
#include "fpl/norms.hpp"

namespace fpl {

// Discrete energy
//
//   J(u) = sum_T |T| * H^p(grad u|_T) / p  -  sum_i m_i * f(X2_i) * u_i
//
// on piecewise-linear fields: the gradient term is exact (the gradient is
// constant per simplex), the load term uses mass-lumped nodal quadrature with
// the cross-section datum f extended constantly along the axis.  The *_half
// members restrict both terms to the tagged inner half cylinder (zero when the
// mesh carries no tags).
struct EnergyBreakdown {
    double dirichlet_part = 0; // sum |T| H^p(grad u)/p, whole mesh
    double load_part = 0;      // sum m_i f_i u_i, whole mesh
    double total = 0;          // dirichlet_part - load_part

    double dirichlet_half = 0;
    double load_half = 0;
    double total_half = 0;
};

// Region selector for norms of gradients. InsideHalf requires the mesh to
// carry a non-empty inner-half tagging (see tag_half_cylinder).
enum class Region { All, InsideHalf };

// Energy of a constrained field. `f` is a field on the matching cross-section
// mesh (nullptr means f == 0); on a cross-section mesh f lives on the same
// mesh as u. Throws input_error on mesh mismatch or unconstrained u,
// parameter_error for p <= 1.
EnergyBreakdown energy(const NormSpec& norm, double p, const Field& u, const Field* f);

// Gradient of the discrete energy with respect to nodal values, zeroed at
// dirichlet nodes: component i is sum_T |T| <flux(grad u|_T), grad phi_i|_T>
// minus the lumped load. In exact mode a simplex gradient sitting on a kink of
// H makes the flux undefined; energy_gradient throws singular_point_error
// there, try_energy_gradient reports false instead.
Field energy_gradient(const NormSpec& norm, double p, const Field& u, const Field* f);
bool try_energy_gradient(const NormSpec& norm, double p, const Field& u, const Field* f,
                         Field& out);

// ( sum_{T in region} |T| * |grad u|_T|_2^p )^(1/p) with the euclidean
// gradient magnitude. Throws input_error when the region holds no simplices,
// parameter_error for p < 1.
double grad_lp_norm(const Field& u, double p, Region region);

// Mass-lumped ( sum_i m_i |u_i|^p )^(1/p). parameter_error for p < 1.
double lp_norm(const Field& u, double p);

// Extends a cross-section field constantly along the axis of `target`:
// output(X1, X2) = w(X2). The extension has exactly zero axis-direction
// gradient components on every simplex. Throws input_error when the meshes do
// not align node-for-node in the cross section.
Field extend_constant(const Field& w, const Mesh& target);

// Axis average: per cross-section node, the trapezoidal average of u over the
// axis line through that node, divided by the axis volume. The output lives on
// `cross_mesh` and is constrained on its boundary.
Field axis_average(const Field& u, const Mesh& cross_mesh);

// Constant-per-simplex gradient of u on simplex s (dim entries).
void simplex_gradient(const Field& u, std::int64_t s, std::span<double> out);

// Mean of the nodal values of u over the vertices of simplex s.
double simplex_mean(const Field& u, std::int64_t s);

// Reference implementations assembled with plain scatter loops and naive
// accumulation, kept independent of the parallel kernels for testing.
EnergyBreakdown energy_serial(const NormSpec& norm, double p, const Field& u, const Field* f);
bool try_energy_gradient_serial(const NormSpec& norm, double p, const Field& u, const Field* f,
                                Field& out);

// Deterministic sum: pairwise reduction over the span, independent of thread
// count. Exposed for reuse by solver diagnostics and tests.
double pairwise_sum(std::span<const double> xs);

} // namespace fpl
