// Command-line driver: single solves, eigenvalue runs, rate ladders, norm
// checks, and the pointwise convexity-identity check, all emitting CSV plus
// a resolved copy of the configuration they ran with.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpl/config.hpp"
#include "fpl/discrete.hpp"
#include "fpl/errors.hpp"
#include "fpl/experiments.hpp"
#include "fpl/field.hpp"
#include "fpl/format.hpp"
#include "fpl/mesh.hpp"
#include "fpl/norms.hpp"
#include "fpl/rng.hpp"
#include "fpl/solve.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kCheckFailed = 2;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> sets;
    int workers = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "configuration file to load");
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--set", opts.sets, "override a config entry, section.key=value")
        ->take_all();
    sub->add_option("--workers", opts.workers, "parallel ladder entries")
        ->capture_default_str();
    sub->add_option("--seed", opts.seed, "base seed for randomized pieces")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
}

fpl::RunConfig load_config(const CommonOpts& opts) {
    fpl::RunConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream is(opts.config_path);
        if (!is) throw fpl::input_error("cannot read config file: " + opts.config_path);
        std::ostringstream buf;
        buf << is.rdbuf();
        cfg = fpl::parse_config(buf.str());
    }
    for (const std::string& assignment : opts.sets) fpl::apply_override(cfg, assignment);
    if (opts.seed_given) cfg.ladder.solver.seed = opts.seed;
    return cfg;
}

std::filesystem::path prepare_out(const CommonOpts& opts, const fpl::RunConfig& cfg) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    fpl::write_text_atomic((dir / "config_resolved.ini").string(), fpl::print_config(cfg));
    return dir;
}

std::string field_csv(const fpl::Mesh& mesh, const fpl::Field& u) {
    std::string out;
    for (int k = 0; k < mesh.dim; ++k) out += "x" + std::to_string(k) + ",";
    out += "u\n";
    for (std::int64_t i = 0; i < mesh.node_count; ++i) {
        for (int k = 0; k < mesh.dim; ++k)
            out += fpl::fmt_double(mesh.node_coord(i, k)) + ",";
        out += fpl::fmt_double(u.values[static_cast<std::size_t>(i)]) + "\n";
    }
    return out;
}

// The load lives on the cross-section mesh; the energy assembly extends it
// along the axis.
fpl::Field make_load(const fpl::LadderConfig& lad, const fpl::Mesh& cross_mesh) {
    fpl::Field f = fpl::Field::zeros(cross_mesh, false);
    if (lad.f_values.empty()) {
        for (auto& v : f.values) v = lad.f_const;
    } else {
        if (static_cast<std::int64_t>(lad.f_values.size()) != cross_mesh.node_count)
            throw fpl::input_error("f_values has " + std::to_string(lad.f_values.size()) +
                                   " entries but the cross mesh has " +
                                   std::to_string(cross_mesh.node_count) + " nodes");
        f.values = lad.f_values;
    }
    return f;
}

void print_solve_summary(const fpl::SolveResult& r) {
    std::cout << "energy = " << fpl::fmt_double(r.energy.total) << "\n"
              << "weak_residual = " << fpl::fmt_double(r.weak_residual) << "\n"
              << "iterations = " << r.iterations << "\n"
              << "converged = " << (r.converged ? "yes" : "no") << "\n";
}

int run_solve(const CommonOpts& opts, bool cross_only) {
    const fpl::RunConfig cfg = load_config(opts);
    const fpl::LadderConfig& lad = cfg.ladder;
    const auto dir = prepare_out(opts, cfg);
    const int total_dim = lad.axis_dim + static_cast<int>(lad.cross_box.size());
    const fpl::NormSpec norm = fpl::parse_norm(lad.norm_text, lad.axis_dim, total_dim);
    const fpl::Mesh cross_mesh = fpl::build_cross_section(lad.cross_box, lad.h_cross);
    const fpl::Field f = make_load(lad, cross_mesh);

    if (cross_only) {
        const fpl::SolveResult r =
            fpl::solve_cross_section(norm, lad.axis_dim, lad.p, cross_mesh, &f, lad.solver);
        print_solve_summary(r);
        fpl::write_text_atomic((dir / "cross.csv").string(), field_csv(cross_mesh, r.field));
        if (!r.converged) {
            std::cout << "solve did not certify the gradient tolerance\n";
            return kCheckFailed;
        }
        return kOk;
    }

    const fpl::Mesh mesh =
        fpl::build_cylinder(cfg.ell, lad.axis_dim, lad.cross_box, lad.h_axis, lad.h_cross);
    const fpl::SolveResult r = fpl::solve_dirichlet(norm, lad.p, mesh, &f, lad.solver);
    print_solve_summary(r);
    fpl::write_text_atomic((dir / "solution.csv").string(), field_csv(mesh, r.field));
    if (!r.converged) {
        std::cout << "solve did not certify the gradient tolerance\n";
        return kCheckFailed;
    }
    return kOk;
}

int run_eigen(const CommonOpts& opts) {
    const fpl::RunConfig cfg = load_config(opts);
    const fpl::LadderConfig& lad = cfg.ladder;
    const auto dir = prepare_out(opts, cfg);
    const int total_dim = lad.axis_dim + static_cast<int>(lad.cross_box.size());
    const fpl::NormSpec norm = fpl::parse_norm(lad.norm_text, lad.axis_dim, total_dim);
    const fpl::Mesh mesh =
        fpl::build_cylinder(cfg.ell, lad.axis_dim, lad.cross_box, lad.h_axis, lad.h_cross);
    const fpl::EigenResult r = fpl::solve_eigen(norm, lad.p, mesh, lad.solver);
    std::cout << "lambda = " << fpl::fmt_double(r.lambda) << "\n"
              << "iterations = " << r.iterations << "\n"
              << "converged = " << (r.converged ? "yes" : "no") << "\n";
    fpl::write_text_atomic((dir / "eigen.csv").string(), field_csv(mesh, r.field));
    if (!r.converged) {
        std::cout << "minimization did not plateau within the iteration budget\n";
        return kCheckFailed;
    }
    return kOk;
}

int run_rates(const CommonOpts& opts, bool force_poincare) {
    fpl::RunConfig cfg = load_config(opts);
    if (force_poincare) cfg.ladder.kind = fpl::ExperimentKind::poincare;
    const auto dir = prepare_out(opts, cfg);
    const fpl::LadderResult res = fpl::run_ladder(cfg.ladder, opts.workers);
    const std::string csv_name = std::string(fpl::kind_name(res.kind)) + ".csv";
    fpl::write_text_atomic((dir / csv_name).string(), fpl::csv_text(res));
    fpl::write_text_atomic((dir / "fits.txt").string(), fpl::sidecar_text(cfg.ladder, res));
    fpl::write_text_atomic((dir / "plot.gp").string(),
                           fpl::plot_script(cfg.ladder, res, csv_name));
    std::cout << fpl::sidecar_text(cfg.ladder, res);
    if (res.aborted) {
        std::cout << "ladder aborted: " << res.abort_reason << "\n";
        if (!res.rows.empty()) {
            std::cout << "failing row:";
            for (double v : res.rows.back()) std::cout << " " << fpl::fmt_double(v);
            std::cout << "\n";
        }
        return kCheckFailed;
    }
    if (!res.assertion_failures.empty()) {
        for (const std::string& a : res.assertion_failures)
            std::cout << "assertion failed: " << a << "\n";
        std::cout << "rows:\n";
        for (const auto& row : res.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                std::cout << (c ? "," : "") << fpl::fmt_double(row[c]);
            std::cout << "\n";
        }
        return kCheckFailed;
    }
    return kOk;
}

int run_check_norm(const CommonOpts& opts, const std::string& descriptor) {
    const fpl::RunConfig cfg = load_config(opts);
    const fpl::LadderConfig& lad = cfg.ladder;
    const auto dir = prepare_out(opts, cfg);
    const int total_dim = lad.axis_dim + static_cast<int>(lad.cross_box.size());
    const std::string text = descriptor.empty() ? lad.norm_text : descriptor;
    const fpl::NormSpec spec = fpl::parse_norm(text, lad.axis_dim, total_dim);
    const std::uint64_t seed = opts.seed_given ? opts.seed : 42;
    const fpl::AxiomReport rep = fpl::check_norm_axioms(spec, 1000, seed);
    std::string out;
    out += "norm = " + text + "\n";
    out += "samples = " + std::to_string(rep.samples) + "\n";
    out += "homogeneity = " + fpl::fmt_double(rep.homogeneity) + "\n";
    out += "subadditivity = " + fpl::fmt_double(rep.subadditivity) + "\n";
    out += "euler = " + fpl::fmt_double(rep.euler) + "\n";
    out += "hoelder = " + fpl::fmt_double(rep.hoelder) + "\n";
    out += "dual_identity = " + fpl::fmt_double(rep.dual_identity) + "\n";
    std::cout << out;
    fpl::write_text_atomic((dir / "check_norm.txt").string(), out);
    const double worst =
        std::max({rep.homogeneity, rep.subadditivity, rep.euler, rep.hoelder, rep.dual_identity});
    if (worst > 1e-8) {
        std::cout << "axiom violation above 1e-8\n";
        return kCheckFailed;
    }
    return kOk;
}

int run_picone(const CommonOpts& opts) {
    const fpl::RunConfig cfg = load_config(opts);
    const fpl::LadderConfig& lad = cfg.ladder;
    const auto dir = prepare_out(opts, cfg);
    const int total_dim = lad.axis_dim + static_cast<int>(lad.cross_box.size());
    const fpl::NormSpec norm = fpl::parse_norm(lad.norm_text, lad.axis_dim, total_dim);
    const fpl::Mesh mesh =
        fpl::build_cylinder(cfg.ell, lad.axis_dim, lad.cross_box, lad.h_axis, lad.h_cross);
    const std::uint64_t base = opts.seed_given ? opts.seed : lad.solver.seed;

    std::string csv = "pair,max_abs_diff,min_l,checked,skipped\n";
    double worst_diff = 0.0;
    double worst_min = 0.0;
    const int pairs = 100;
    for (int k = 0; k < pairs; ++k) {
        fpl::Rng rng(base * 1000003ULL + static_cast<std::uint64_t>(k) + 1ULL);
        fpl::Field u = fpl::Field::zeros(mesh);
        fpl::Field v = fpl::Field::zeros(mesh);
        for (std::int64_t i = 0; i < mesh.node_count; ++i) {
            if (mesh.dirichlet[static_cast<std::size_t>(i)]) continue;
            u.values[static_cast<std::size_t>(i)] = rng.uniform01();
            v.values[static_cast<std::size_t>(i)] = 0.1 + rng.uniform01();
        }
        const fpl::PiconeReport rep = fpl::picone_check(norm, lad.p, u, v);
        worst_diff = std::max(worst_diff, rep.max_abs_diff);
        worst_min = std::min(worst_min, rep.min_l);
        csv += std::to_string(k) + "," + fpl::fmt_double(rep.max_abs_diff) + "," +
               fpl::fmt_double(rep.min_l) + "," + std::to_string(rep.checked) + "," +
               std::to_string(rep.skipped) + "\n";
    }
    fpl::write_text_atomic((dir / "picone.csv").string(), csv);
    std::cout << "pairs = " << pairs << "\n"
              << "max_abs_diff = " << fpl::fmt_double(worst_diff) << "\n"
              << "min_l = " << fpl::fmt_double(worst_min) << "\n";
    if (worst_diff > 1e-9 || worst_min < -1e-10) {
        std::cout << "identity violated beyond tolerance\n";
        return kCheckFailed;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic p-Dirichlet energies on long cylinders"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string descriptor;

    CLI::App* solve = app.add_subcommand("solve", "solve the load problem on a cylinder");
    CLI::App* cross = app.add_subcommand("cross", "solve the limit problem on the cross-section");
    CLI::App* eigen = app.add_subcommand("eigen", "minimize the Rayleigh quotient on a cylinder");
    CLI::App* rates = app.add_subcommand("rates", "run the rate ladder from the config");
    CLI::App* check = app.add_subcommand("check-norm", "sample the gauge axioms");
    CLI::App* picone = app.add_subcommand("picone", "check the pointwise convexity identity");
    CLI::App* poincare = app.add_subcommand("poincare", "run the Poincare-constant ladder");
    for (CLI::App* sub : {solve, cross, eigen, rates, check, picone, poincare})
        add_common(sub, opts);
    check->add_option("descriptor", descriptor, "norm descriptor to check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (solve->parsed()) return run_solve(opts, false);
        if (cross->parsed()) return run_solve(opts, true);
        if (eigen->parsed()) return run_eigen(opts);
        if (rates->parsed()) return run_rates(opts, false);
        if (poincare->parsed()) return run_rates(opts, true);
        if (check->parsed()) return run_check_norm(opts, descriptor);
        if (picone->parsed()) return run_picone(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
