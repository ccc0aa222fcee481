#pragma once

// Minkowski gauges used as anisotropies for the p-Laplace energies:
//   qnorm(q)   H(z) = (sum |z_i|^q)^(1/q),           q >= 1
//   matq       H(z) = qnorm_q(A z),                  A square invertible
//   block      H(z) = (sum_i w_i (sum_{j in block i} |z_j|^{e_i})^{q/e_i})^(1/q)
//   split      H(z) = (F(z_axis)^q + G(z_cross)^q)^(1/q)
//   eucl(t)    H(z) = t |z|_2
// plus two internal gauges: the cross-section restriction z2 -> H(0, z2) and
// the degenerate cross-gradient gauge z -> |z_cross|_2 used by the strip
// inequality runner.
//
// Each |.| site can be smoothed: |u| -> sqrt(u^2 + delta^2) - delta with
// delta = smoothing_eps * smoothing_scale. The shift keeps H(0) = 0 exactly,
// preserves convexity and 0 <= H_delta <= H, and leaves the site derivative
// u/sqrt(u^2+delta^2). Exact mode (delta = 0) refuses gradient queries on the
// non-differentiability set instead of guessing a subgradient.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fpl {

struct NormSpec;

inline constexpr int kMaxDim = 16;

struct QNormFamily {
    double q;
};

struct MatrixQNormFamily {
    double q;
    int n;
    std::vector<double> a;       // row-major n x n
    std::vector<double> a_inv_t; // inverse transpose, for the analytic dual
};

struct BlockNormFamily {
    double q;
    std::vector<int> sizes;
    std::vector<double> inner_exps; // e_i >= 1, one per block
    std::vector<double> weights;    // w_i > 0
};

struct SplitNormFamily {
    double q;
    std::shared_ptr<const NormSpec> axis;
    std::shared_ptr<const NormSpec> cross;
};

struct ScaledEuclideanFamily {
    double t;
};

// H(0, .) restriction of `inner` to the trailing dimensions.
struct CrossSliceFamily {
    std::shared_ptr<const NormSpec> inner;
    int skip;
};

// |z_cross|_2 over the trailing dimensions; vanishes on the axis subspace, so
// it is a gauge but not a norm. Internal use only (strip inequality).
struct CrossEuclideanFamily {
    int from;
};

struct NormSpec {
    std::variant<QNormFamily, MatrixQNormFamily, BlockNormFamily, SplitNormFamily,
                 ScaledEuclideanFamily, CrossSliceFamily, CrossEuclideanFamily>
        family;
    int dimension = 0;
    double smoothing_eps = 0.0;
    double smoothing_scale = 1.0;

    double delta() const { return smoothing_eps * smoothing_scale; }
    bool exact() const { return delta() == 0.0; }
    NormSpec with_smoothing(double eps, double scale = 1.0) const;

    // Smallest exponent appearing at any site (drives the smoothing schedule).
    double min_exponent() const;
    bool has_unit_exponent() const;
};

NormSpec make_qnorm(double q, int n);
NormSpec make_matq(double q, int n, std::vector<double> a_rowmajor);
NormSpec make_block(double q, std::vector<int> sizes, std::vector<double> inner_exps,
                    std::vector<double> weights);
NormSpec make_split(double q, NormSpec axis, NormSpec cross);
NormSpec make_eucl(double t, int n);
NormSpec cross_restriction(const NormSpec& spec, int axis_dim);
NormSpec make_cross_euclidean(int axis_dim, int total_dim);

// Descriptor grammar: qnorm(q) | matq(q; a11,a12; a21,a22) |
// block(q; m1,..; e1,..; w1,..) | split(q; axis-desc; cross-desc) | eucl(t).
// qnorm/eucl take their dimension from context; split hands axis_dim to the
// axis part and the rest to the cross part.
NormSpec parse_norm(const std::string& text, int axis_dim, int total_dim);
std::string norm_to_string(const NormSpec& spec);

double norm_eval(const NormSpec& spec, std::span<const double> z);
void norm_grad(const NormSpec& spec, std::span<const double> z, std::span<double> out);
// H^{p-1}(z) grad H(z), extended by 0 at z = 0; requires p > 1.
void flux(const NormSpec& spec, double p, std::span<const double> z, std::span<double> out);

// Assembly kernels: no exceptions; return false when the exact-mode gradient
// is undefined at z (caller skips/counts). z must have spec.dimension entries.
bool try_norm_grad(const NormSpec& spec, const double* z, double* out);
bool try_flux(const NormSpec& spec, double p, const double* z, double* out);

double dual_eval(const NormSpec& spec, std::span<const double> xi);

struct ThetaBounds {
    double theta1;       // min of H on the euclidean unit sphere
    double theta2;       // max of H on the euclidean unit sphere
    double grad_bound_c; // (sum_i H(e_i)^2)^(1/2), a gradient bound >= theta2
};
ThetaBounds theta_bounds(const NormSpec& spec, int probe_count);

struct AxiomReport {
    double homogeneity = 0;   // |H(tz)| vs |t|H(z), relative
    double subadditivity = 0; // positive part of H(x+y)-H(x)-H(y), relative
    double euler = 0;         // <grad H(z), z> vs H(z), relative
    double hoelder = 0;       // positive part of <xi,x> - H0(xi)H(x), relative
    double dual_identity = 0; // |H0(grad H(z)) - 1|
    int samples = 0;
    double max_violation() const;
};
// Exact mode only; deterministic in (samples, seed) regardless of threads.
AxiomReport check_norm_axioms(const NormSpec& spec, int samples, std::uint64_t seed);

enum class Assumption { A1_pge2, A1_plt2, A2, A3 };

struct MonotonicityReport {
    Assumption assumption;
    double p = 0;
    int sample_count = 0;
    // min (A1*/A3) or max (A2) of the defining ratio over sampled pairs
    double empirical_constant = 0;
    std::vector<double> worst_z1, worst_z2;
};
MonotonicityReport estimate_monotonicity(const NormSpec& spec, Assumption which, double p,
                                         int sample_count, std::uint64_t seed);

// sup over unit x of <xi,x>/gauge(x), by seeded sphere sampling plus
// golden-ratio shrinking cap refinement. Exposed for double-dual checks.
double sup_linear_ratio(const std::function<double(std::span<const double>)>& gauge, int n,
                        std::span<const double> xi, int base_samples, int refine_steps,
                        std::uint64_t seed);

} // namespace fpl
