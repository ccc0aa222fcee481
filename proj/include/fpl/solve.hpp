#pragma once

#include <cstdint>
#include <vector>

#include "fpl/discrete.hpp"
#include "fpl/field.hpp"
#include "fpl/mesh.hpp"
#include "fpl/norms.hpp"

namespace fpl {

// Options for the descent solvers. An empty eps_schedule selects the default
// smoothing continuation: a single exact stage when every exponent in the norm
// is >= 2 and p >= 2, otherwise scale*{1e-2, 1e-4, 1e-6, final} where final is
// 0 (or 1e-8 when the norm carries a unit exponent, whose gradient genuinely
// kinks). The scale factor is the characteristic gradient magnitude measured
// on a quadratic presolve. A nonzero seed perturbs the initial iterate, which
// is useful for probing uniqueness of the minimizer.
struct SolveOptions {
    double tol_grad = 1e-10;   // stop when the constrained gradient inf-norm falls below
    double tol_energy = 1e-13; // relative objective decrease treated as a plateau
    int max_iters = 20000;     // total accepted-step budget across all stages
    std::vector<double> eps_schedule; // strictly decreasing, last entry >= 0; empty = default
    std::uint64_t seed = 0;

    friend bool operator==(const SolveOptions&, const SolveOptions&) = default;
};

struct SolveResult {
    Field field;
    EnergyBreakdown energy; // evaluated with the norm exactly as passed in
    double weak_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    // Objective values of every accepted iterate, stage by stage. Entries are
    // nonincreasing within a stage; stages may use different smoothing, so the
    // value can jump at stage boundaries.
    std::vector<double> energy_trace;
    std::vector<std::size_t> eps_stage_offsets; // start index of each stage in the trace
    std::vector<double> eps_used;               // smoothing value of each stage
};

struct EigenResult {
    double lambda = 0.0;
    Field field; // nonnegative, lp_norm(field, p) == 1
    // Exact Rayleigh quotient of every accepted iterate; nonincreasing over
    // the whole run because steps are accepted against the unsmoothed value.
    std::vector<double> rayleigh_trace;
    int iterations = 0;
    bool converged = false;
    std::vector<std::size_t> eps_stage_offsets;
    std::vector<double> eps_used;
};

// Minimizes J(u) = sum |T| H^p(grad u)/p - sum m_i f_i u_i over fields
// vanishing on the dirichlet set, by limited-memory quasi-Newton descent with
// Armijo backtracking under the smoothing continuation schedule. The returned
// weak_residual is the inf-norm of the exact-mode energy gradient when that is
// defined at the final iterate, and of the final-stage smoothed gradient
// otherwise; converged requires weak_residual <= max(tol_grad, 1e-8 * the
// lumped load inf-norm). f may be null (zero load).
SolveResult solve_dirichlet(const NormSpec& norm, double p, const Mesh& mesh, const Field* f,
                            const SolveOptions& opts = {});

// Limit-problem solve on the cross section: restricts `norm` to its trailing
// dimensions (H with the first axis_dim arguments zeroed) and runs
// solve_dirichlet on `cross_mesh` in dimension n - axis_dim.
SolveResult solve_cross_section(const NormSpec& norm, int axis_dim, double p,
                                const Mesh& cross_mesh, const Field* f,
                                const SolveOptions& opts = {});

// Minimizes the Rayleigh quotient R(v) = p * dirichlet_part(v) / lp_norm(v)^p
// by projected descent: gradient step, clamp to the nonnegative part,
// renormalize to lp_norm = 1. Initialized from the positive tensor-product
// sine bump sampled at the nodes, multiplicatively perturbed by the seed.
// Steps are accepted only when the exact quotient decreases, so
// rayleigh_trace is globally nonincreasing; converged means the final stage
// reached successive relative quotient differences below tol_energy.
EigenResult solve_eigen(const NormSpec& norm, double p, const Mesh& mesh,
                        const SolveOptions& opts = {});

// Inf-norm over free nodes of the weak-form defect of the Dirichlet problem:
// exactly the inf-norm of energy_gradient for the given spec.
double weak_residual(const NormSpec& norm, double p, const Field& u, const Field* f);

// Eigen variant: inf-norm over free nodes of
// (flux gather)_i - lambda * m_i |v_i|^{p-2} v_i.
double weak_residual_eigen(const NormSpec& norm, double p, const Field& v, double lambda);

// Per-simplex comparison of the two sides of the Picone-type identity for the
// gauge H: with r the ratio of the simplex averages of u and v,
//   R = H^p(grad u) - <flux(grad v), p r^{p-1} grad u - (p-1) r^p grad v>
//   L = H^p(grad u) + (p-1) r^p H^p(grad v) - p r^{p-1} <flux(grad v), grad u>
// computed along independent routes. Simplices where the flux is singular in
// exact mode are skipped and counted. Requires u >= 0 everywhere and
// v >= 1e-8 at every free node (input_error otherwise, also when the simplex
// average of v vanishes while that of u does not).
struct PiconeReport {
    double max_abs_diff = 0.0; // max over simplices of |R - L|
    double min_l = 0.0;        // min over simplices of L
    std::int64_t checked = 0;
    std::int64_t skipped = 0;
};
PiconeReport picone_check(const NormSpec& norm, double p, const Field& u, const Field& v);

} // namespace fpl
