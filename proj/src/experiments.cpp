#include "fpl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "fpl/discrete.hpp"
#include "fpl/errors.hpp"
#include "fpl/field.hpp"
#include "fpl/format.hpp"
#include "fpl/mesh.hpp"
#include "fpl/norms.hpp"

namespace fpl {

const char* kind_name(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::solution_rate: return "solution_rate";
    case ExperimentKind::energy_rate: return "energy_rate";
    case ExperimentKind::eigen_rate: return "eigen_rate";
    case ExperimentKind::gradient_bound: return "gradient_bound";
    case ExperimentKind::poincare: return "poincare";
    }
    return "unknown";
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points, RateModel model,
                 double floor) {
    RateFit fit;
    fit.model = model;
    std::vector<double> xs, ys;
    for (const auto& [ell, v] : points) {
        if (!(v > 0.0) || v <= floor || !std::isfinite(v)) {
            ++fit.dropped;
            continue;
        }
        xs.push_back(model == RateModel::power ? std::log(ell) : ell);
        ys.push_back(std::log(v));
    }
    const std::size_t n = xs.size();
    if (n < 3) throw parameter_error("fit_rate: fewer than 3 usable points");

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw parameter_error("fit_rate: abscissae are all identical");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    fit.exponent_or_rate = model == RateModel::power ? slope : -slope;
    fit.constant = std::exp(intercept);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

void validate_ladder(const LadderConfig& cfg) {
    if (!(cfg.p > 1.0)) throw parameter_error("ladder: p must exceed 1");
    if (cfg.axis_dim < 1) throw parameter_error("ladder: axis_dim must be at least 1");
    if (cfg.cross_box.empty()) throw input_error("ladder: cross box must not be empty");
    if (cfg.ell_list.size() < 3)
        throw parameter_error("ladder: ell_list needs at least 3 entries");
    if (!(cfg.ell_list.front() > 0.0))
        throw parameter_error("ladder: ell values must be positive");
    for (std::size_t k = 0; k + 1 < cfg.ell_list.size(); ++k)
        if (!(cfg.ell_list[k + 1] > cfg.ell_list[k]))
            throw parameter_error("ladder: ell_list must be increasing");
    if (!(cfg.h_axis > 0.0) || !(cfg.h_cross > 0.0))
        throw parameter_error("ladder: mesh steps must be positive");
    if (cfg.seeds.empty()) throw parameter_error("ladder: seeds must not be empty");
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Shared per-run state; the load field points at cross_mesh, so instances are
// built in place and never copied.
struct ProblemSetup {
    int total_dim = 0;
    NormSpec norm;
    NormSpec cross_norm;
    Mesh cross_mesh;
    Field f_cross;
    bool f_zero = true;

    ProblemSetup() = default;
    ProblemSetup(const ProblemSetup&) = delete;
    ProblemSetup& operator=(const ProblemSetup&) = delete;

    void init(const LadderConfig& cfg) {
        validate_ladder(cfg);
        total_dim = cfg.axis_dim + static_cast<int>(cfg.cross_box.size());
        norm = parse_norm(cfg.norm_text, cfg.axis_dim, total_dim);
        cross_norm = cross_restriction(norm, cfg.axis_dim);
        cross_mesh = build_cross_section(cfg.cross_box, cfg.h_cross);
        f_cross = Field::zeros(cross_mesh, false);
        if (cfg.f_values.empty()) {
            for (auto& v : f_cross.values) v = cfg.f_const;
        } else {
            if (static_cast<std::int64_t>(cfg.f_values.size()) != cross_mesh.node_count)
                throw input_error("ladder: f_values has " + std::to_string(cfg.f_values.size()) +
                                  " entries but the cross mesh has " +
                                  std::to_string(cross_mesh.node_count) + " nodes");
            f_cross.values = cfg.f_values;
        }
        f_zero = true;
        for (double v : f_cross.values)
            if (v != 0.0) f_zero = false;
    }
};

struct EntryResult {
    bool ok = false;
    std::string error;
    std::vector<double> row;
    double extra = 0.0; // runner-specific scalar (e.g. averaged-field energy)
};

// Run one job per ladder entry, in parallel up to `workers`; results keep the
// ell order regardless of completion order. Exceptions become entry errors.
template <class Fn>
std::vector<EntryResult> map_ladder(const LadderConfig& cfg, int workers, Fn&& fn) {
    const int n = static_cast<int>(cfg.ell_list.size());
    std::vector<EntryResult> out(static_cast<std::size_t>(n));
    const int nt = std::max(1, workers);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt) if (nt > 1)
    for (int i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(cfg.ell_list[static_cast<std::size_t>(i)]);
            out[static_cast<std::size_t>(i)].ok = true;
        } catch (const std::exception& e) {
            out[static_cast<std::size_t>(i)].ok = false;
            out[static_cast<std::size_t>(i)].error = e.what();
        }
    }
    return out;
}

// Move entry rows into the result until the first failure, which becomes a
// nan diagnostic row plus the abort reason.
void collect_rows(const LadderConfig& cfg, std::vector<EntryResult>& entries,
                  LadderResult& result) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].ok) {
            result.aborted = true;
            result.abort_reason =
                "ell=" + fmt_double(cfg.ell_list[i]) + ": " + entries[i].error;
            std::vector<double> diag(result.columns.size(), kNan);
            diag[0] = cfg.ell_list[i];
            result.rows.push_back(std::move(diag));
            return;
        }
        result.rows.push_back(std::move(entries[i].row));
    }
}

std::string non_certified(const SolveResult& r) {
    return "solve did not certify (weak residual " + fmt_double(r.weak_residual) + ")";
}

// The pseudo regime: gauges whose p-th power splits additively between the
// axis and cross coordinate blocks, which is when the exponential decay of
// the solution toward the extended limit is expected.
bool pseudo_regime(const NormSpec& spec, double p, int m) {
    if (const auto* f = std::get_if<QNormFamily>(&spec.family)) return f->q == p;
    if (std::get_if<ScaledEuclideanFamily>(&spec.family)) return p == 2.0;
    if (const auto* f = std::get_if<MatrixQNormFamily>(&spec.family)) {
        if (f->q != p) return false;
        for (int r = 0; r < f->n; ++r)
            for (int c = 0; c < f->n; ++c)
                if (r != c && f->a[static_cast<std::size_t>(r * f->n + c)] != 0.0) return false;
        return true;
    }
    if (const auto* f = std::get_if<SplitNormFamily>(&spec.family))
        return f->q == p && f->axis->dimension == m;
    if (const auto* f = std::get_if<BlockNormFamily>(&spec.family)) {
        if (f->q != p) return false;
        for (double e : f->inner_exps)
            if (e != p) return false;
        int pos = 0;
        for (int sz : f->sizes) {
            if (pos == m) break;
            pos += sz;
        }
        return pos == m; // some block boundary separates axis from cross dims
    }
    return false;
}

double certification_floor(const LadderConfig& cfg) {
    return 100.0 * cfg.solver.tol_grad;
}

double gap_tolerance(const LadderConfig& cfg) {
    return std::max(1e-6, 10.0 * cfg.solver.tol_grad);
}

void check_ratio_band(const std::vector<double>& vals, double band, const char* what,
                      LadderResult& result) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (double v : vals) {
        if (!(v > 0.0)) continue;
        lo = first ? v : std::min(lo, v);
        hi = first ? v : std::max(hi, v);
        first = false;
    }
    if (first) return; // no positive entries to band-check
    if (hi > band * lo)
        result.assertion_failures.push_back(std::string(what) + ": max/min = " +
                                            fmt_double(hi / lo) + " exceeds " +
                                            fmt_double(band));
}

} // namespace

LadderResult run_solution_rate(const LadderConfig& cfg, int workers) {
    ProblemSetup s;
    s.init(cfg);
    LadderResult result;
    result.kind = ExperimentKind::solution_rate;
    result.columns = {"ell", "err_halfcyl", "grad_lp"};

    SolveOptions opts = cfg.solver;
    opts.seed = 0;
    const SolveResult uinf = solve_dirichlet(s.cross_norm, cfg.p, s.cross_mesh, &s.f_cross, opts);
    if (!uinf.converged) {
        result.aborted = true;
        result.abort_reason = "cross-section " + non_certified(uinf);
        return result;
    }

    auto entries = map_ladder(cfg, workers, [&](double ell) {
        EntryResult e;
        Mesh mesh = build_cylinder(ell, cfg.axis_dim, cfg.cross_box, cfg.h_axis, cfg.h_cross);
        const SolveResult ul = solve_dirichlet(s.norm, cfg.p, mesh, &s.f_cross, opts);
        if (!ul.converged) throw input_error(non_certified(ul));
        const Field ext = extend_constant(uinf.field, mesh);
        Field diff = ul.field;
        diff.constrained = false;
        for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= ext.values[i];
        e.row = {ell, grad_lp_norm(diff, cfg.p, Region::InsideHalf),
                 grad_lp_norm(ul.field, cfg.p, Region::All)};
        return e;
    });
    collect_rows(cfg, entries, result);
    if (result.aborted) return result;

    std::vector<std::pair<double, double>> pts;
    for (const auto& row : result.rows) pts.emplace_back(row[0], row[1]);
    const double floor = certification_floor(cfg);
    try {
        result.fit_labels = {"err_power", "err_exponential"};
        result.fits.push_back(fit_rate(pts, RateModel::power, floor));
        result.fits.push_back(fit_rate(pts, RateModel::exponential, floor));
    } catch (const parameter_error&) {
        result.fits.clear();
        result.fit_labels.clear();
        result.fits_degenerate = true;
    }

    if (!s.f_zero) {
        for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
            const double cur = result.rows[i][1];
            const double nxt = result.rows[i + 1][1];
            // below the certification floor the values are solver residue, not
            // measurements, so growth there is not a regression
            if (nxt > 1.01 * cur + 1e-15 && nxt > floor)
                result.assertion_failures.push_back(
                    "error not nonincreasing at ell=" + fmt_double(result.rows[i + 1][0]));
        }
        const double m = static_cast<double>(cfg.axis_dim);
        const double alpha =
            cfg.p >= 2.0 ? m - cfg.p / (cfg.p - 1.0) : m - cfg.p * cfg.p / (2.0 - cfg.p);
        double first_scaled = -1.0;
        for (const auto& row : result.rows) {
            if (!(row[1] > floor)) continue;
            const double scaled = row[1] * std::pow(row[0], -alpha);
            if (first_scaled < 0.0) {
                first_scaled = scaled;
            } else if (scaled > 4.0 * first_scaled) {
                result.assertion_failures.push_back(
                    "scaled error grows past 4x the first rung at ell=" + fmt_double(row[0]));
            }
        }
        if (!result.fits_degenerate) {
            if (pseudo_regime(s.norm, cfg.p, cfg.axis_dim)) {
                if (result.fits[1].r_squared < result.fits[0].r_squared - 1e-12)
                    result.assertion_failures.push_back(
                        "exponential fit loses to power fit in a split-additive regime");
            }
            if (cfg.p >= 2.0 && result.fits[0].exponent_or_rate > alpha + 0.5)
                result.assertion_failures.push_back(
                    "power-fit exponent " + fmt_double(result.fits[0].exponent_or_rate) +
                    " exceeds the decay bound " + fmt_double(alpha + 0.5));
        }
    }
    return result;
}

LadderResult run_gradient_bound(const LadderConfig& cfg, int workers) {
    ProblemSetup s;
    s.init(cfg);
    LadderResult result;
    result.kind = ExperimentKind::gradient_bound;
    result.columns = {"ell", "grad_ratio"};

    SolveOptions opts = cfg.solver;
    opts.seed = 0;
    auto entries = map_ladder(cfg, workers, [&](double ell) {
        EntryResult e;
        Mesh mesh = build_cylinder(ell, cfg.axis_dim, cfg.cross_box, cfg.h_axis, cfg.h_cross);
        const SolveResult ul = solve_dirichlet(s.norm, cfg.p, mesh, &s.f_cross, opts);
        if (!ul.converged) throw input_error(non_certified(ul));
        const double ratio = grad_lp_norm(ul.field, cfg.p, Region::All) /
                             std::pow(ell, static_cast<double>(cfg.axis_dim) / cfg.p);
        e.row = {ell, ratio};
        return e;
    });
    collect_rows(cfg, entries, result);
    if (result.aborted) return result;

    if (!s.f_zero) {
        std::vector<double> ratios;
        for (const auto& row : result.rows) ratios.push_back(row[1]);
        check_ratio_band(ratios, 2.0, "gradient ratio", result);
    }
    return result;
}

LadderResult run_energy_rate(const LadderConfig& cfg, int workers) {
    ProblemSetup s;
    s.init(cfg);
    LadderResult result;
    result.kind = ExperimentKind::energy_rate;
    result.columns = {"ell", "scaled_energy", "gap", "gap_times_ell"};

    SolveOptions opts = cfg.solver;
    opts.seed = 0;
    const SolveResult uinf = solve_dirichlet(s.cross_norm, cfg.p, s.cross_mesh, &s.f_cross, opts);
    if (!uinf.converged) {
        result.aborted = true;
        result.abort_reason = "cross-section " + non_certified(uinf);
        return result;
    }
    const double jinf = uinf.energy.total;

    auto entries = map_ladder(cfg, workers, [&](double ell) {
        EntryResult e;
        Mesh mesh = build_cylinder(ell, cfg.axis_dim, cfg.cross_box, cfg.h_axis, cfg.h_cross);
        const SolveResult ul = solve_dirichlet(s.norm, cfg.p, mesh, &s.f_cross, opts);
        if (!ul.converged) throw input_error(non_certified(ul));
        const double scaled =
            ul.energy.total / std::pow(ell, static_cast<double>(cfg.axis_dim));
        const double gap = scaled - jinf;
        e.row = {ell, scaled, gap, gap * ell};
        // energy of the axis-averaged field on the cross-section: can never
        // undercut the cross-section minimum
        const Field avg = axis_average(ul.field, s.cross_mesh);
        e.extra = energy(s.cross_norm, cfg.p, avg, &s.f_cross).total;
        return e;
    });

    // jensen values before rows are moved out
    std::vector<std::pair<double, double>> jensen;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].ok) jensen.emplace_back(cfg.ell_list[i], entries[i].extra);
    collect_rows(cfg, entries, result);
    if (result.aborted) return result;

    const double tol = gap_tolerance(cfg);
    for (const auto& row : result.rows)
        if (row[2] < -tol)
            result.assertion_failures.push_back("gap below -" + fmt_double(tol) +
                                                " at ell=" + fmt_double(row[0]));
    std::vector<double> gl;
    for (const auto& row : result.rows) gl.push_back(row[3]);
    check_ratio_band(gl, 4.0, "gap times ell", result);
    for (const auto& [ell, javg] : jensen)
        if (javg < jinf - 1e-9 * (1.0 + std::abs(jinf)))
            result.assertion_failures.push_back(
                "averaged-field energy undercuts the cross-section minimum at ell=" +
                fmt_double(ell));
    return result;
}

LadderResult run_eigen_rate(const LadderConfig& cfg, int workers) {
    ProblemSetup s;
    s.init(cfg);
    LadderResult result;
    result.kind = ExperimentKind::eigen_rate;
    result.columns = {"ell", "lambda1", "gap", "gap_times_ell", "gap_times_ell_p"};

    const auto multistart = [&](const NormSpec& gauge, const Mesh& mesh) {
        double best = std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::uint64_t seed : cfg.seeds) {
            SolveOptions opts = cfg.solver;
            opts.seed = seed;
            const EigenResult er = solve_eigen(gauge, cfg.p, mesh, opts);
            if (er.converged) {
                best = std::min(best, er.lambda);
                any = true;
            }
        }
        if (!any) throw input_error("no eigen run converged");
        return best;
    };

    double mu_inf = 0.0;
    try {
        mu_inf = multistart(s.cross_norm, s.cross_mesh);
    } catch (const std::exception& e) {
        result.aborted = true;
        result.abort_reason = std::string("cross-section: ") + e.what();
        return result;
    }

    auto entries = map_ladder(cfg, workers, [&](double ell) {
        EntryResult e;
        Mesh mesh = build_cylinder(ell, cfg.axis_dim, cfg.cross_box, cfg.h_axis, cfg.h_cross);
        const double lambda = multistart(s.norm, mesh);
        const double gap = lambda - mu_inf;
        e.row = {ell, lambda, gap, gap * ell, gap * std::pow(ell, cfg.p)};
        return e;
    });
    collect_rows(cfg, entries, result);
    if (result.aborted) return result;

    std::vector<std::pair<double, double>> pts;
    for (const auto& row : result.rows) pts.emplace_back(row[0], row[2]);
    try {
        result.fit_labels = {"gap_power"};
        result.fits.push_back(fit_rate(pts, RateModel::power, certification_floor(cfg)));
    } catch (const parameter_error&) {
        result.fits.clear();
        result.fit_labels.clear();
        result.fits_degenerate = true;
    }

    const double tol = gap_tolerance(cfg);
    for (const auto& row : result.rows)
        if (row[2] < -tol)
            result.assertion_failures.push_back("gap below -" + fmt_double(tol) +
                                                " at ell=" + fmt_double(row[0]));

    const auto* split = std::get_if<SplitNormFamily>(&s.norm.family);
    if (split != nullptr && split->axis->dimension == cfg.axis_dim) {
        std::vector<double> glp;
        for (const auto& row : result.rows) glp.push_back(row[4]);
        check_ratio_band(glp, 4.0, "gap times ell^p", result);
        if (!result.fits_degenerate &&
            std::abs(result.fits[0].exponent_or_rate + cfg.p) > 0.3)
            result.assertion_failures.push_back(
                "gap power-fit exponent " + fmt_double(result.fits[0].exponent_or_rate) +
                " is not within 0.3 of " + fmt_double(-cfg.p));
    }
    return result;
}

LadderResult run_poincare(const LadderConfig& cfg, int workers) {
    ProblemSetup s;
    s.init(cfg);
    LadderResult result;
    result.kind = ExperimentKind::poincare;
    result.columns = {"ell", "c_p"};

    const NormSpec gauge = make_cross_euclidean(cfg.axis_dim, s.total_dim);
    auto entries = map_ladder(cfg, workers, [&](double ell) {
        EntryResult e;
        Mesh mesh = build_cylinder(ell, cfg.axis_dim, cfg.cross_box, cfg.h_axis, cfg.h_cross,
                                   BoundaryMode::StripOnly);
        double best = std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::uint64_t seed : cfg.seeds) {
            SolveOptions opts = cfg.solver;
            opts.seed = seed;
            const EigenResult er = solve_eigen(gauge, cfg.p, mesh, opts);
            if (er.converged) {
                best = std::min(best, er.lambda);
                any = true;
            }
        }
        if (!any) throw input_error("no constrained minimization run converged");
        e.row = {ell, std::pow(best, -1.0 / cfg.p)};
        return e;
    });
    collect_rows(cfg, entries, result);
    if (result.aborted) return result;

    std::vector<double> cps;
    for (const auto& row : result.rows) cps.push_back(row[1]);
    check_ratio_band(cps, 1.05, "poincare constant", result);
    return result;
}

LadderResult run_ladder(const LadderConfig& cfg, int workers) {
    switch (cfg.kind) {
    case ExperimentKind::solution_rate: return run_solution_rate(cfg, workers);
    case ExperimentKind::energy_rate: return run_energy_rate(cfg, workers);
    case ExperimentKind::eigen_rate: return run_eigen_rate(cfg, workers);
    case ExperimentKind::gradient_bound: return run_gradient_bound(cfg, workers);
    case ExperimentKind::poincare: return run_poincare(cfg, workers);
    }
    throw parameter_error("run_ladder: unknown experiment kind");
}

std::string csv_text(const LadderResult& result) {
    std::string out;
    for (std::size_t c = 0; c < result.columns.size(); ++c) {
        if (c) out += ',';
        out += result.columns[c];
    }
    out += '\n';
    for (const auto& row : result.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += fmt_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

namespace {

const char* model_name(RateModel m) {
    return m == RateModel::power ? "power" : "exponential";
}

} // namespace

std::string sidecar_text(const LadderConfig& cfg, const LadderResult& result) {
    std::string out;
    out += std::string("tool = ") + kToolVersion + "\n";
    out += std::string("experiment = ") + kind_name(result.kind) + "\n";
    out += "norm = " + cfg.norm_text + "\n";
    out += "p = " + fmt_double(cfg.p) + "\n";
    out += "axis_dim = " + std::to_string(cfg.axis_dim) + "\n";
    out += "cross_box =";
    for (const auto& [a, b] : cfg.cross_box)
        out += " [" + fmt_double(a) + "," + fmt_double(b) + "]";
    out += "\n";
    out += "h_axis = " + fmt_double(cfg.h_axis) + "\n";
    out += "h_cross = " + fmt_double(cfg.h_cross) + "\n";
    out += "ell_list =";
    for (double ell : cfg.ell_list) out += " " + fmt_double(ell);
    out += "\n";
    if (cfg.f_values.empty()) {
        out += "f = " + fmt_double(cfg.f_const) + "\n";
    } else {
        out += "f = nodal (" + std::to_string(cfg.f_values.size()) + " samples)\n";
    }
    out += "seeds =";
    for (std::uint64_t s : cfg.seeds) out += " " + std::to_string(s);
    out += "\n";
    out += "tol_grad = " + fmt_double(cfg.solver.tol_grad) + "\n";
    out += "tol_energy = " + fmt_double(cfg.solver.tol_energy) + "\n";
    out += "max_iters = " + std::to_string(cfg.solver.max_iters) + "\n";
    out += std::string("status = ") + (result.aborted ? "aborted" : "ok") + "\n";
    if (result.aborted) out += "abort_reason = " + result.abort_reason + "\n";
    if (result.fits_degenerate) out += "fits = degenerate (too few usable points)\n";
    for (std::size_t i = 0; i < result.fits.size(); ++i) {
        const RateFit& f = result.fits[i];
        out += "fit " + result.fit_labels[i] + ": model=" + model_name(f.model) +
               " exponent_or_rate=" + fmt_double(f.exponent_or_rate) +
               " constant=" + fmt_double(f.constant) + " r_squared=" + fmt_double(f.r_squared) +
               " dropped=" + std::to_string(f.dropped) + "\n";
    }
    if (result.assertion_failures.empty()) {
        out += "assertions = all held\n";
    } else {
        for (const auto& a : result.assertion_failures) out += "assertion failed: " + a + "\n";
    }
    return out;
}

std::string plot_script(const LadderConfig& cfg, const LadderResult& result,
                        const std::string& csv_filename) {
    std::string out;
    out += "# gnuplot script, data in " + csv_filename + "\n";
    out += "set datafile separator ','\n";
    out += "set key autotitle columnhead\n";
    out += "set xlabel 'ell'\n";
    const std::string src = "'" + csv_filename + "'";
    switch (result.kind) {
    case ExperimentKind::solution_rate:
        out += "set logscale y\n";
        out += "plot " + src + " using 1:2 with linespoints, " + src +
               " using 1:3 with linespoints\n";
        break;
    case ExperimentKind::energy_rate:
        out += "plot " + src + " using 1:2 with linespoints, " + src +
               " using 1:4 with linespoints\n";
        break;
    case ExperimentKind::eigen_rate:
        out += "set logscale y\n";
        out += "plot " + src + " using 1:3 with linespoints, " + src +
               " using 1:5 with linespoints\n";
        break;
    case ExperimentKind::gradient_bound:
    case ExperimentKind::poincare:
        out += "plot " + src + " using 1:2 with linespoints\n";
        break;
    }
    (void)cfg;
    return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw input_error("cannot open for writing: " + tmp);
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        os.flush();
        if (!os) throw input_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw input_error("rename failed for: " + path);
    }
}

} // namespace fpl
