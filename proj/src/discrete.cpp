#include "fpl/discrete.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "fpl/errors.hpp"

namespace fpl {
namespace {

void check_field(const Field& u, const char* what) {
    if (u.mesh == nullptr) throw input_error(std::string(what) + ": field has no mesh");
    if (u.size() != u.mesh->node_count)
        throw input_error(std::string(what) + ": field value count does not match its mesh");
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

// Verifies that `cross` is the cross-section companion of `base`: axis-free,
// matching the trailing dimensions of `base` node for node.
void check_cross_alignment(const Mesh& base, const Mesh& cross, const char* what) {
    const int m = base.axis_dim;
    const int cd = base.dim - m;
    bool ok = cross.axis_dim == 0 && cross.dim == cd;
    for (int k = 0; ok && k < cd; ++k) {
        ok = cross.counts[static_cast<std::size_t>(k)] == base.counts[static_cast<std::size_t>(m + k)] &&
             close(cross.h[static_cast<std::size_t>(k)], base.h[static_cast<std::size_t>(m + k)]) &&
             close(cross.origin[static_cast<std::size_t>(k)], base.origin[static_cast<std::size_t>(m + k)]);
    }
    if (!ok)
        throw input_error(std::string(what) +
                          ": cross-section mesh does not align with the target mesh");
}

// Constant gradient of the piecewise-linear interpolant on simplex s.
inline void simplex_grad_raw(const Mesh& mesh, const double* vals, std::int64_t s, double* out) {
    const int d = mesh.dim;
    std::int64_t nodes[kMaxDim + 1];
    mesh.simplex_nodes(s, nodes);
    const double* g = mesh.simplex_grads(s);
    for (int k = 0; k < d; ++k) out[k] = 0.0;
    for (int v = 0; v <= d; ++v) {
        const double uv = vals[nodes[v]];
        const double* row = g + v * d;
        for (int k = 0; k < d; ++k) out[k] += uv * row[k];
    }
}

void check_load(const Mesh& mesh, const Field* f, const char* what) {
    if (!f) return;
    check_field(*f, what);
    check_cross_alignment(mesh, *f->mesh, what);
}

} // namespace

double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 32) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

EnergyBreakdown energy(const NormSpec& norm, double p, const Field& u, const Field* f) {
    check_field(u, "energy");
    if (!(p > 1.0)) throw parameter_error("energy requires p > 1");
    const Mesh& mesh = *u.mesh;
    check_load(mesh, f, "energy");

    const std::int64_t ns = mesh.simplex_count;
    const int d = mesh.dim;
    const bool tagged = !mesh.inside_half.empty();
    std::vector<double> en(static_cast<std::size_t>(ns));
    std::vector<double> enh(tagged ? static_cast<std::size_t>(ns) : 0);
    const double* vals = u.values.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < ns; ++s) {
        double z[kMaxDim];
        simplex_grad_raw(mesh, vals, s, z);
        const double hv = norm_eval(norm, std::span<const double>(z, static_cast<std::size_t>(d)));
        const double e = mesh.simplex_volume * std::pow(hv, p) / p;
        en[static_cast<std::size_t>(s)] = e;
        if (tagged) enh[static_cast<std::size_t>(s)] = mesh.inside_half[static_cast<std::size_t>(s)] ? e : 0.0;
    }

    EnergyBreakdown out;
    out.dirichlet_part = pairwise_sum(en);
    out.dirichlet_half = tagged ? pairwise_sum(enh) : 0.0;

    if (f) {
        const std::int64_t nn = mesh.node_count;
        const bool half_mass = !mesh.lumped_mass_half.empty();
        std::vector<double> ld(static_cast<std::size_t>(nn));
        std::vector<double> ldh(half_mass ? static_cast<std::size_t>(nn) : 0);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < nn; ++i) {
            const double fv = (*f)[mesh.cross_index(i)];
            ld[static_cast<std::size_t>(i)] = mesh.lumped_mass[static_cast<std::size_t>(i)] * fv * vals[i];
            if (half_mass)
                ldh[static_cast<std::size_t>(i)] =
                    mesh.lumped_mass_half[static_cast<std::size_t>(i)] * fv * vals[i];
        }
        out.load_part = pairwise_sum(ld);
        out.load_half = half_mass ? pairwise_sum(ldh) : 0.0;
    }
    out.total = out.dirichlet_part - out.load_part;
    out.total_half = out.dirichlet_half - out.load_half;
    return out;
}

namespace {

// Shared body of energy_gradient / try_energy_gradient. Returns false with
// *bad_out = offending simplex when the flux is undefined somewhere.
bool gradient_impl(const NormSpec& norm, double p, const Field& u, const Field* f, Field& out,
                   std::int64_t* bad_out) {
    check_field(u, "energy_gradient");
    if (!(p > 1.0)) throw parameter_error("energy_gradient requires p > 1");
    const Mesh& mesh = *u.mesh;
    check_load(mesh, f, "energy_gradient");

    const std::int64_t ns = mesh.simplex_count;
    const int d = mesh.dim;
    const double* vals = u.values.data();

    // Pass 1: per-simplex scaled flux vectors, embarrassingly parallel.
    std::vector<double> fluxv(static_cast<std::size_t>(ns) * static_cast<std::size_t>(d));
    std::atomic<std::int64_t> bad{-1};
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < ns; ++s) {
        double z[kMaxDim];
        double q[kMaxDim];
        simplex_grad_raw(mesh, vals, s, z);
        if (!try_flux(norm, p, z, q)) {
            std::int64_t prev = bad.load(std::memory_order_relaxed);
            while ((prev == -1 || s < prev) &&
                   !bad.compare_exchange_weak(prev, s, std::memory_order_relaxed)) {
            }
            continue;
        }
        for (int k = 0; k < d; ++k)
            fluxv[static_cast<std::size_t>(s) * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
                mesh.simplex_volume * q[k];
    }
    if (bad.load() != -1) {
        if (bad_out) *bad_out = bad.load();
        return false;
    }

    // Pass 2: gather per node over the fixed-order incidence lists, so the
    // result is bit-identical regardless of thread count.
    if (out.mesh != &mesh || out.size() != mesh.node_count) out = Field::zeros(mesh);
    out.constrained = true;
    double* g = out.values.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < mesh.node_count; ++i) {
        if (mesh.dirichlet[static_cast<std::size_t>(i)]) {
            g[i] = 0.0;
            continue;
        }
        double acc = 0.0;
        for (std::int64_t e = mesh.adj_start[static_cast<std::size_t>(i)];
             e < mesh.adj_start[static_cast<std::size_t>(i) + 1]; ++e) {
            const std::int64_t s = mesh.adj_simplex[static_cast<std::size_t>(e)];
            const int lv = mesh.adj_local[static_cast<std::size_t>(e)];
            const double* row = mesh.simplex_grads(s) + lv * d;
            const double* fx = fluxv.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(d);
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += fx[k] * row[k];
            acc += dot;
        }
        if (f) acc -= mesh.lumped_mass[static_cast<std::size_t>(i)] * (*f)[mesh.cross_index(i)];
        g[i] = acc;
    }
    return true;
}

} // namespace

Field energy_gradient(const NormSpec& norm, double p, const Field& u, const Field* f) {
    Field out;
    std::int64_t bad = -1;
    if (!gradient_impl(norm, p, u, f, out, &bad))
        throw singular_point_error("energy gradient undefined: norm gradient singular on simplex " +
                                   std::to_string(bad) + " (use a smoothed norm)");
    return out;
}

bool try_energy_gradient(const NormSpec& norm, double p, const Field& u, const Field* f,
                         Field& out) {
    return gradient_impl(norm, p, u, f, out, nullptr);
}

double grad_lp_norm(const Field& u, double p, Region region) {
    check_field(u, "grad_lp_norm");
    if (!(p >= 1.0)) throw parameter_error("grad_lp_norm requires p >= 1");
    const Mesh& mesh = *u.mesh;
    const unsigned char* mask = nullptr;
    if (region == Region::InsideHalf) {
        if (mesh.inside_half.empty())
            throw input_error("grad_lp_norm: mesh carries no inner-half tagging");
        mask = mesh.inside_half.data();
        if (std::find(mesh.inside_half.begin(), mesh.inside_half.end(),
                      static_cast<unsigned char>(1)) == mesh.inside_half.end())
            throw input_error("grad_lp_norm: inner-half region is empty");
    }
    const std::int64_t ns = mesh.simplex_count;
    const int d = mesh.dim;
    const double* vals = u.values.data();
    std::vector<double> arr(static_cast<std::size_t>(ns));
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < ns; ++s) {
        if (mask && !mask[s]) {
            arr[static_cast<std::size_t>(s)] = 0.0;
            continue;
        }
        double z[kMaxDim];
        simplex_grad_raw(mesh, vals, s, z);
        double a2 = 0.0;
        for (int k = 0; k < d; ++k) a2 += z[k] * z[k];
        arr[static_cast<std::size_t>(s)] = mesh.simplex_volume * std::pow(std::sqrt(a2), p);
    }
    return std::pow(pairwise_sum(arr), 1.0 / p);
}

double lp_norm(const Field& u, double p) {
    check_field(u, "lp_norm");
    if (!(p >= 1.0)) throw parameter_error("lp_norm requires p >= 1");
    const Mesh& mesh = *u.mesh;
    const std::int64_t nn = mesh.node_count;
    const double* vals = u.values.data();
    std::vector<double> arr(static_cast<std::size_t>(nn));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i)
        arr[static_cast<std::size_t>(i)] =
            mesh.lumped_mass[static_cast<std::size_t>(i)] * std::pow(std::abs(vals[i]), p);
    return std::pow(pairwise_sum(arr), 1.0 / p);
}

Field extend_constant(const Field& w, const Mesh& target) {
    check_field(w, "extend_constant");
    check_cross_alignment(target, *w.mesh, "extend_constant");
    Field out = Field::zeros(target, false);
    const std::int64_t nn = target.node_count;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) out.values[static_cast<std::size_t>(i)] = w[target.cross_index(i)];
    // The extension vanishes on the dirichlet set only when the axis ends are
    // unconstrained (or there is no axis at all).
    out.constrained = w.constrained && (target.axis_dim == 0 ||
                                        target.boundary_mode == BoundaryMode::StripOnly);
    return out;
}

Field axis_average(const Field& u, const Mesh& cross_mesh) {
    check_field(u, "axis_average");
    const Mesh& mesh = *u.mesh;
    check_cross_alignment(mesh, cross_mesh, "axis_average");

    // Product trapezoid weight per axis node; nodes along the axis block are
    // contiguous in node order, with dimension 0 varying fastest.
    const std::int64_t anc = mesh.axis_node_count();
    std::vector<double> w(static_cast<std::size_t>(anc), 1.0);
    double axis_vol = 1.0;
    std::int64_t stride = 1;
    for (int k = 0; k < mesh.axis_dim; ++k) {
        const int n = mesh.counts[static_cast<std::size_t>(k)];
        const double hk = mesh.h[static_cast<std::size_t>(k)];
        axis_vol *= hk * (n - 1);
        for (std::int64_t a = 0; a < anc; ++a) {
            const int idx = static_cast<int>((a / stride) % n);
            w[static_cast<std::size_t>(a)] *= (idx == 0 || idx == n - 1) ? hk * 0.5 : hk;
        }
        stride *= n;
    }

    Field out = Field::zeros(cross_mesh, false);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < cross_mesh.node_count; ++c) {
        const double* line = u.values.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(anc);
        double acc = 0.0;
        for (std::int64_t a = 0; a < anc; ++a) acc += w[static_cast<std::size_t>(a)] * line[a];
        out.values[static_cast<std::size_t>(c)] = acc / axis_vol;
    }
    out.enforce_constraint();
    return out;
}

void simplex_gradient(const Field& u, std::int64_t s, std::span<double> out) {
    check_field(u, "simplex_gradient");
    const Mesh& mesh = *u.mesh;
    if (s < 0 || s >= mesh.simplex_count) throw input_error("simplex_gradient: simplex id out of range");
    if (out.size() < static_cast<std::size_t>(mesh.dim))
        throw input_error("simplex_gradient: output span too small");
    simplex_grad_raw(mesh, u.values.data(), s, out.data());
}

double simplex_mean(const Field& u, std::int64_t s) {
    check_field(u, "simplex_mean");
    const Mesh& mesh = *u.mesh;
    if (s < 0 || s >= mesh.simplex_count) throw input_error("simplex_mean: simplex id out of range");
    std::int64_t nodes[kMaxDim + 1];
    mesh.simplex_nodes(s, nodes);
    double acc = 0.0;
    for (int v = 0; v <= mesh.dim; ++v) acc += u.values[static_cast<std::size_t>(nodes[v])];
    return acc / (mesh.dim + 1);
}

} // namespace fpl
