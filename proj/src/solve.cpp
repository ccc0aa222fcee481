#include "fpl/solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fpl/errors.hpp"
#include "fpl/rng.hpp"

namespace fpl {
namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// |v|^{p-2} v extended by 0 at v = 0 (valid for p > 1).
double signed_power(double v, double p) {
    return v == 0.0 ? 0.0 : std::pow(std::abs(v), p - 2.0) * v;
}

void validate_options(const SolveOptions& o) {
    if (!(o.tol_grad > 0.0) || !(o.tol_energy > 0.0))
        throw parameter_error("solver tolerances must be positive");
    if (o.max_iters <= 0) throw parameter_error("max_iters must be positive");
    for (std::size_t k = 0; k + 1 < o.eps_schedule.size(); ++k)
        if (!(o.eps_schedule[k] > o.eps_schedule[k + 1]))
            throw parameter_error("eps_schedule must be strictly decreasing");
    if (!o.eps_schedule.empty() && o.eps_schedule.back() < 0.0)
        throw parameter_error("eps_schedule entries must be >= 0");
}

std::vector<double> default_schedule(const NormSpec& norm, double p) {
    if (norm.min_exponent() >= 2.0 && p >= 2.0) return {0.0};
    const double final_eps = norm.has_unit_exponent() ? 1e-8 : 0.0;
    return {1e-2, 1e-4, 1e-6, final_eps};
}

// True when H^2 is a quadratic form, making the p = 2 energy exactly quadratic.
bool is_inner_product(const NormSpec& s) {
    if (const auto* f = std::get_if<QNormFamily>(&s.family)) return f->q == 2.0;
    if (const auto* f = std::get_if<MatrixQNormFamily>(&s.family)) return f->q == 2.0;
    if (const auto* f = std::get_if<BlockNormFamily>(&s.family)) {
        if (f->q != 2.0) return false;
        for (double e : f->inner_exps)
            if (e != 2.0) return false;
        return true;
    }
    if (const auto* f = std::get_if<SplitNormFamily>(&s.family))
        return f->q == 2.0 && is_inner_product(*f->axis) && is_inner_product(*f->cross);
    if (std::get_if<ScaledEuclideanFamily>(&s.family)) return true;
    if (const auto* f = std::get_if<CrossSliceFamily>(&s.family)) return is_inner_product(*f->inner);
    return false; // the degenerate cross-euclidean gauge is excluded
}

double max_grad_mag(const Field& u) {
    const Mesh& mesh = *u.mesh;
    std::vector<double> z(static_cast<std::size_t>(mesh.dim));
    double best = 0.0;
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        simplex_gradient(u, s, z);
        best = std::max(best, l2(z));
    }
    return best;
}

struct StageOutcome {
    int iters = 0;
    bool singular = false;     // flux undefined at an iterate in exact mode
    bool hit_grad_tol = false; // stopped because the gradient tolerance was met
};

// Conjugate gradients for the exactly quadratic case (p = 2, inner-product
// norm): matvec(v) = energy_gradient(spec, 2, v, 0), load handled separately.
// The trace records J(u_k) = -(b.u_k + u_k.r_k)/2, which CG makes
// nonincreasing; the true residual is refreshed periodically.
StageOutcome cg_stage(const NormSpec& spec, const Field* f, Field& u, double tol_grad, int budget,
                      std::vector<double>* trace) {
    StageOutcome out;
    const Mesh& mesh = *u.mesh;
    const std::size_t n = u.values.size();

    std::vector<double> b(n, 0.0);
    if (f) {
        for (std::int64_t i = 0; i < mesh.node_count; ++i)
            if (!mesh.dirichlet[static_cast<std::size_t>(i)])
                b[static_cast<std::size_t>(i)] =
                    mesh.lumped_mass[static_cast<std::size_t>(i)] * (*f)[mesh.cross_index(i)];
    }

    Field tmp = u;
    Field av = u;
    const auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
        tmp.values = x;
        if (!try_energy_gradient(spec, 2.0, tmp, nullptr, av)) return false;
        y = av.values;
        return true;
    };

    std::vector<double> r(n), d(n), ad(n);
    if (!matvec(u.values, r)) {
        out.singular = true;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    d = r;
    double rr = dot(r, r);
    if (trace) trace->push_back(-0.5 * (dot(b, u.values) + dot(u.values, r)));
    double stall_best = inf_norm(r);
    int stall_age = 0;

    while (out.iters < budget) {
        if (inf_norm(r) <= tol_grad) {
            out.hit_grad_tol = true;
            return out;
        }
        if (!matvec(d, ad)) {
            out.singular = true;
            return out;
        }
        const double dad = dot(d, ad);
        if (!(dad > 0.0) || !std::isfinite(dad)) return out; // lost positivity; give up here
        const double alpha = rr / dad;
        for (std::size_t i = 0; i < n; ++i) u.values[i] += alpha * d[i];
        ++out.iters;
        if (out.iters % 50 == 0) {
            if (!matvec(u.values, r)) {
                out.singular = true;
                return out;
            }
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ad[i];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
        if (trace) trace->push_back(-0.5 * (dot(b, u.values) + dot(u.values, r)));

        const double rinf = inf_norm(r);
        if (rinf < 0.5 * stall_best) {
            stall_best = rinf;
            stall_age = 0;
        } else if (++stall_age > 200) {
            return out; // stagnated at the precision floor
        }
    }
    return out;
}

// Limited-memory quasi-Newton descent with Armijo backtracking (factor 0.5,
// slope 1e-4), falling back to steepest descent when curvature breaks. The
// acceptance test allows a double-precision noise margin so progress can
// continue once true decrements drop below what energy comparisons resolve;
// stopping then rests on the gradient norm, with a stagnation window as the
// safety net.
StageOutcome lbfgs_stage(const NormSpec& spec, double p, const Field* f, Field& u, double tol_grad,
                         double tol_energy, int budget, std::vector<double>* trace) {
    StageOutcome out;
    if (budget <= 0) return out;
    const std::size_t n = u.values.size();

    Field g;
    if (!try_energy_gradient(spec, p, u, f, g)) {
        out.singular = true;
        return out;
    }
    double e = energy(spec, p, u, f).total;
    if (trace) trace->push_back(e);

    constexpr std::size_t kMem = 10;
    std::vector<std::vector<double>> sv, yv;
    std::vector<double> rho;
    std::vector<double> d(n), q(n), alpha;
    Field ut = u;
    Field gn;
    int plateau = 0;
    double best_grad = inf_norm(g.values);
    int no_improve = 0;

    while (out.iters < budget) {
        const double ginf = inf_norm(g.values);
        if (ginf <= tol_grad) {
            out.hit_grad_tol = true;
            return out;
        }
        if (ginf <= 0.95 * best_grad) {
            best_grad = ginf;
            no_improve = 0;
        } else if (++no_improve >= 40 || (no_improve >= 20 && plateau >= 5)) {
            return out; // gradient stagnated at its attainable floor
        }

        // two-loop recursion
        q = g.values;
        const std::size_t mem = sv.size();
        alpha.assign(mem, 0.0);
        for (std::size_t k = mem; k-- > 0;) {
            alpha[k] = rho[k] * dot(sv[k], q);
            for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * yv[k][i];
        }
        if (mem > 0) {
            const double gamma = dot(sv[mem - 1], yv[mem - 1]) / dot(yv[mem - 1], yv[mem - 1]);
            for (auto& x : q) x *= gamma;
        }
        for (std::size_t k = 0; k < mem; ++k) {
            const double beta = rho[k] * dot(yv[k], q);
            for (std::size_t i = 0; i < n; ++i) q[i] += (alpha[k] - beta) * sv[k][i];
        }
        for (std::size_t i = 0; i < n; ++i) d[i] = -q[i];

        double dg = dot(d, g.values);
        bool steepest = mem == 0;
        if (!(dg < 0.0) || !std::isfinite(dg)) {
            for (std::size_t i = 0; i < n; ++i) d[i] = -g.values[i];
            dg = -dot(g.values, g.values);
            steepest = true;
        }

        double enew = 0.0;
        bool accepted = false;
        double t = steepest ? 1.0 / std::max(1.0, l2(g.values)) : 1.0;
        const double noise = 1e-15 * std::max(1.0, std::abs(e));
        for (int round = 0; round < 2 && !accepted; ++round) {
            double tt = t;
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t i = 0; i < n; ++i) ut.values[i] = u.values[i] + tt * d[i];
                const double et = energy(spec, p, ut, f).total;
                if (et <= e + 1e-4 * tt * dg + noise) {
                    accepted = true;
                    t = tt;
                    enew = et;
                    break;
                }
                tt *= 0.5;
            }
            if (!accepted) {
                if (steepest) break;
                for (std::size_t i = 0; i < n; ++i) d[i] = -g.values[i];
                dg = -dot(g.values, g.values);
                t = 1.0 / std::max(1.0, l2(g.values));
                steepest = true;
            }
        }
        if (!accepted) return out; // line search exhausted at the precision floor

        if (!try_energy_gradient(spec, p, ut, f, gn)) {
            out.singular = true;
            return out;
        }

        std::vector<double> snew(n), ynew(n);
        for (std::size_t i = 0; i < n; ++i) {
            snew[i] = t * d[i];
            ynew[i] = gn.values[i] - g.values[i];
        }
        const double sy = dot(snew, ynew);
        if (sy > 1e-12 * l2(snew) * l2(ynew)) {
            if (sv.size() == kMem) {
                sv.erase(sv.begin());
                yv.erase(yv.begin());
                rho.erase(rho.begin());
            }
            sv.push_back(std::move(snew));
            yv.push_back(std::move(ynew));
            rho.push_back(1.0 / sy);
        }

        u.values.swap(ut.values);
        g.values.swap(gn.values);
        ++out.iters;
        if (trace) trace->push_back(enew);
        const double rel = (e - enew) / std::max(1.0, std::abs(enew));
        e = enew;
        plateau = rel < tol_energy ? plateau + 1 : 0;
    }
    return out;
}

StageOutcome minimize_stage(const NormSpec& spec, double p, const Field* f, Field& u,
                            double tol_grad, double tol_energy, int budget,
                            std::vector<double>* trace) {
    if (p == 2.0 && spec.exact() && is_inner_product(spec))
        return cg_stage(spec, f, u, tol_grad, budget, trace);
    return lbfgs_stage(spec, p, f, u, tol_grad, tol_energy, budget, trace);
}

double lumped_load_inf(const Mesh& mesh, const Field* f) {
    if (!f) return 0.0;
    double m = 0.0;
    for (std::int64_t i = 0; i < mesh.node_count; ++i)
        if (!mesh.dirichlet[static_cast<std::size_t>(i)])
            m = std::max(m, std::abs(mesh.lumped_mass[static_cast<std::size_t>(i)] *
                                     (*f)[mesh.cross_index(i)]));
    return m;
}

} // namespace

SolveResult solve_dirichlet(const NormSpec& norm, double p, const Mesh& mesh, const Field* f,
                            const SolveOptions& opts) {
    validate_options(opts);
    if (!(p > 1.0)) throw parameter_error("solve_dirichlet requires p > 1");
    if (norm.dimension != mesh.dim)
        throw input_error("solve_dirichlet: norm dimension does not match the mesh");

    SolveResult res;
    res.field = Field::zeros(mesh);
    Field& u = res.field;
    int used = 0;

    // Quadratic presolve: cheap initial iterate + characteristic gradient scale.
    double scale = 1.0;
    {
        const NormSpec h2 = make_eucl(1.0, mesh.dim);
        StageOutcome pre = minimize_stage(h2, 2.0, f, u, std::max(opts.tol_grad, 1e-11),
                                          opts.tol_energy, opts.max_iters, nullptr);
        used += pre.iters;
        const double mg = max_grad_mag(u);
        scale = mg > 1e-12 ? mg : 1.0;
    }

    if (opts.seed != 0) {
        Rng rng(opts.seed);
        const double amp = 0.05 * (inf_norm(u.values) + 0.01);
        for (std::int64_t i = 0; i < mesh.node_count; ++i)
            if (!mesh.dirichlet[static_cast<std::size_t>(i)])
                u[i] += amp * (rng.uniform01() - 0.5);
    }

    const std::vector<double> schedule =
        opts.eps_schedule.empty() ? default_schedule(norm, p) : opts.eps_schedule;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        double eps = schedule[k];
        NormSpec spec = eps > 0.0 ? norm.with_smoothing(eps, scale) : norm;
        const double stage_tol =
            k + 1 == schedule.size() ? opts.tol_grad : opts.tol_grad * 100.0;
        res.eps_stage_offsets.push_back(res.energy_trace.size());
        res.eps_used.push_back(eps);
        StageOutcome sr = minimize_stage(spec, p, f, u, stage_tol, opts.tol_energy,
                                         opts.max_iters - used, &res.energy_trace);
        used += sr.iters;
        if (sr.singular && eps == 0.0) {
            // The exact stage stumbled on a kink of H: polish with a tiny
            // smoothing instead of failing outright.
            eps = 1e-8;
            spec = norm.with_smoothing(eps, scale);
            res.eps_stage_offsets.push_back(res.energy_trace.size());
            res.eps_used.push_back(eps);
            StageOutcome sr2 = minimize_stage(spec, p, f, u, stage_tol, opts.tol_energy,
                                              opts.max_iters - used, &res.energy_trace);
            used += sr2.iters;
        }
    }
    res.iterations = used;

    Field gex;
    if (try_energy_gradient(norm, p, u, f, gex)) {
        res.weak_residual = inf_norm(gex.values);
    } else {
        const double fallback =
            res.eps_used.empty() || res.eps_used.back() == 0.0 ? 1e-8 : res.eps_used.back();
        Field gsm;
        try_energy_gradient(norm.with_smoothing(fallback, scale), p, u, f, gsm);
        res.weak_residual = inf_norm(gsm.values);
    }
    res.converged = res.weak_residual <= std::max(opts.tol_grad, 1e-8 * lumped_load_inf(mesh, f));
    res.energy = energy(norm, p, u, f);
    return res;
}

SolveResult solve_cross_section(const NormSpec& norm, int axis_dim, double p,
                                const Mesh& cross_mesh, const Field* f,
                                const SolveOptions& opts) {
    if (cross_mesh.axis_dim != 0)
        throw input_error("solve_cross_section expects a cross-section mesh");
    return solve_dirichlet(cross_restriction(norm, axis_dim), p, cross_mesh, f, opts);
}

namespace {

struct EigenStageOutcome {
    int iters = 0;
    bool singular = false;
    bool plateaued = false;
};

// Projected descent on the Rayleigh quotient: Barzilai-Borwein trial steps,
// clamp to the nonnegative part, renormalize, and accept only when the exact
// quotient does not increase.
EigenStageOutcome eigen_stage(const NormSpec& exact, const NormSpec& spec, double p, Field& v,
                              double& R, double tol_energy, int budget,
                              std::vector<double>& trace) {
    EigenStageOutcome out;
    const Mesh& mesh = *v.mesh;
    const std::size_t n = v.values.size();

    Field gq = Field::zeros(mesh);
    Field dg;
    Field w = v;
    std::vector<double> sdiff(n, 0.0), gprev(n, 0.0);
    bool have_prev = false;
    int plateau = 0;

    while (out.iters < budget) {
        if (!try_energy_gradient(spec, p, v, nullptr, dg)) {
            out.singular = true;
            return out;
        }
        for (std::size_t i = 0; i < n; ++i)
            gq.values[i] = p * dg.values[i] -
                           R * p * mesh.lumped_mass[i] * signed_power(v.values[i], p);
        const double gl2 = l2(gq.values);
        if (gl2 == 0.0) {
            out.plateaued = true;
            return out;
        }

        double step = 1.0 / std::max(gl2, 1e-300);
        if (have_prev) {
            double sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) sy += sdiff[i] * (gq.values[i] - gprev[i]);
            const double ss = dot(sdiff, sdiff);
            if (sy > 0.0 && std::isfinite(sy)) step = std::min(std::max(ss / sy, 1e-14), 1e14);
        }

        bool accepted = false;
        double Rw = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i)
                w.values[i] = std::max(v.values[i] - step * gq.values[i], 0.0);
            const double nw = lp_norm(w, p);
            if (nw > 1e-300) {
                for (auto& x : w.values) x /= nw;
                Rw = p * energy(exact, p, w, nullptr).dirichlet_part;
                if (Rw <= R) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.plateaued = true;
            return out;
        }

        for (std::size_t i = 0; i < n; ++i) sdiff[i] = w.values[i] - v.values[i];
        gprev = gq.values;
        have_prev = true;

        const double rel = (R - Rw) / std::max(std::abs(Rw), 1e-300);
        v.values = w.values;
        R = Rw;
        trace.push_back(R);
        ++out.iters;
        if (rel < tol_energy) {
            if (++plateau >= 2) {
                out.plateaued = true;
                return out;
            }
        } else {
            plateau = 0;
        }
    }
    return out;
}

} // namespace

EigenResult solve_eigen(const NormSpec& norm, double p, const Mesh& mesh,
                        const SolveOptions& opts) {
    validate_options(opts);
    if (!(p > 1.0)) throw parameter_error("solve_eigen requires p > 1");
    if (norm.dimension != mesh.dim)
        throw input_error("solve_eigen: norm dimension does not match the mesh");
    if (mesh.interior_node_count() == 0)
        throw input_error("solve_eigen: mesh has no free nodes");

    EigenResult res;
    res.field = Field::zeros(mesh);
    Field& v = res.field;

    // Positive tensor-product sine bump with a seeded multiplicative wiggle.
    Rng rng(opts.seed);
    for (std::int64_t i = 0; i < mesh.node_count; ++i) {
        double bump = 1.0;
        for (int k = 0; k < mesh.dim; ++k) {
            const double lo = mesh.origin[static_cast<std::size_t>(k)];
            const double edge = mesh.h[static_cast<std::size_t>(k)] *
                                (mesh.counts[static_cast<std::size_t>(k)] - 1);
            bump *= std::sin(3.14159265358979323846 * (mesh.node_coord(i, k) - lo) / edge);
        }
        v[i] = bump * (1.0 + 0.1 * (rng.uniform01() - 0.5));
    }
    v.enforce_constraint();
    const double nv = lp_norm(v, p);
    for (auto& x : v.values) x /= nv;

    double R = p * energy(norm, p, v, nullptr).dirichlet_part;
    res.rayleigh_trace.push_back(R);

    int used = 0;
    bool final_plateaued = false;
    const std::vector<double> schedule =
        opts.eps_schedule.empty() ? default_schedule(norm, p) : opts.eps_schedule;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        double eps = schedule[k];
        const double scale = std::max(max_grad_mag(v), 1e-12);
        NormSpec spec = eps > 0.0 ? norm.with_smoothing(eps, scale) : norm;
        EigenStageOutcome st = eigen_stage(norm, spec, p, v, R, opts.tol_energy,
                                           opts.max_iters - used, res.rayleigh_trace);
        used += st.iters;
        if (st.singular && eps == 0.0) {
            spec = norm.with_smoothing(1e-8, scale);
            st = eigen_stage(norm, spec, p, v, R, opts.tol_energy, opts.max_iters - used,
                             res.rayleigh_trace);
            used += st.iters;
        }
        if (k + 1 == schedule.size()) final_plateaued = st.plateaued;
    }

    res.iterations = used;
    res.converged = final_plateaued;
    const double nfinal = lp_norm(v, p);
    for (auto& x : v.values) x /= nfinal;
    res.lambda = p * energy(norm, p, v, nullptr).dirichlet_part / std::pow(lp_norm(v, p), p);
    return res;
}

double weak_residual(const NormSpec& norm, double p, const Field& u, const Field* f) {
    const Field g = energy_gradient(norm, p, u, f);
    return inf_norm(g.values);
}

double weak_residual_eigen(const NormSpec& norm, double p, const Field& v, double lambda) {
    const Field g = energy_gradient(norm, p, v, nullptr);
    const Mesh& mesh = *v.mesh;
    double m = 0.0;
    for (std::int64_t i = 0; i < mesh.node_count; ++i) {
        if (mesh.dirichlet[static_cast<std::size_t>(i)]) continue;
        const double defect = g[i] - lambda * mesh.lumped_mass[static_cast<std::size_t>(i)] *
                                         signed_power(v[i], p);
        m = std::max(m, std::abs(defect));
    }
    return m;
}

PiconeReport picone_check(const NormSpec& norm, double p, const Field& u, const Field& v) {
    if (u.mesh == nullptr || v.mesh == nullptr || u.mesh != v.mesh)
        throw input_error("picone_check: fields must live on the same mesh");
    if (!(p > 1.0)) throw parameter_error("picone_check requires p > 1");
    const Mesh& mesh = *u.mesh;
    if (u.size() != mesh.node_count || v.size() != mesh.node_count)
        throw input_error("picone_check: field value count does not match the mesh");

    for (std::int64_t i = 0; i < mesh.node_count; ++i) {
        if (u[i] < -1e-12) throw input_error("picone_check: u must be nonnegative");
        if (!mesh.dirichlet[static_cast<std::size_t>(i)] && v[i] < 1e-8)
            throw input_error("picone_check: v is below the 1e-8 floor at a free node");
    }

    PiconeReport rep;
    bool first = true;
    const int d = mesh.dim;
    std::vector<double> zu(static_cast<std::size_t>(d)), zv(static_cast<std::size_t>(d)),
        q(static_cast<std::size_t>(d));
    for (std::int64_t s = 0; s < mesh.simplex_count; ++s) {
        simplex_gradient(u, s, zu);
        simplex_gradient(v, s, zv);
        if (!try_flux(norm, p, zv.data(), q.data())) {
            ++rep.skipped;
            continue;
        }
        const double ubar = simplex_mean(u, s);
        const double vbar = simplex_mean(v, s);
        double ratio = 0.0;
        if (vbar < 1e-8) {
            if (ubar > 1e-8)
                throw input_error(
                    "picone_check: simplex average of v vanishes while that of u does not");
        } else {
            ratio = ubar / vbar;
        }
        const double rp1 = std::pow(ratio, p - 1.0);
        const double rp = rp1 * ratio;
        double fdu = 0.0, fdv = 0.0;
        for (int k = 0; k < d; ++k) {
            fdu += q[static_cast<std::size_t>(k)] * zu[static_cast<std::size_t>(k)];
            fdv += q[static_cast<std::size_t>(k)] * zv[static_cast<std::size_t>(k)];
        }
        const double hu_p = std::pow(norm_eval(norm, zu), p);
        const double hv_p = std::pow(norm_eval(norm, zv), p);
        const double rhs = hu_p - (p * rp1 * fdu - (p - 1.0) * rp * fdv);
        const double lhs = hu_p + (p - 1.0) * rp * hv_p - p * rp1 * fdu;
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(rhs - lhs));
        rep.min_l = first ? lhs : std::min(rep.min_l, lhs);
        first = false;
        ++rep.checked;
    }
    return rep;
}

} // namespace fpl
