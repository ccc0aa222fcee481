#pragma once

// Ladder experiments: sweep the cylinder length over an increasing list,
// solve each problem, and check the asymptotic behaviour quantitatively —
// decay of the solution toward the extended cross-section limit, growth of
// the total gradient norm, per-length energy convergence, eigenvalue gaps,
// and the length-independence of the strip Poincare constant. Rate laws are
// fitted by least squares in log space.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fpl/solve.hpp"

namespace fpl {

inline constexpr const char* kToolVersion = "fplab 0.1";

enum class ExperimentKind { solution_rate, energy_rate, eigen_rate, gradient_bound, poincare };

const char* kind_name(ExperimentKind kind);

enum class RateModel { power, exponential };

// Least-squares fit of v = C * ell^a (power, in log-log) or v = C * e^(-b*ell)
// (exponential, in semilog). exponent_or_rate holds a for power and b for
// exponential; r_squared is computed on the transformed data. Nonpositive
// values and values at or below `floor` are excluded and counted in `dropped`.
struct RateFit {
    RateModel model = RateModel::power;
    double exponent_or_rate = 0.0;
    double constant = 0.0;
    double r_squared = 0.0;
    int dropped = 0;
};

// Throws parameter_error when fewer than 3 usable points remain.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points, RateModel model,
                 double floor = 0.0);

struct LadderConfig {
    std::string norm_text = "qnorm(2)";
    double p = 2.0;
    int axis_dim = 1;
    std::vector<std::pair<double, double>> cross_box = {{0.0, 1.0}};
    double h_axis = 0.0625;
    double h_cross = 0.0625;
    std::vector<double> ell_list;
    ExperimentKind kind = ExperimentKind::solution_rate;
    // Load on the cross-section: constant unless nodal samples are given.
    double f_const = 1.0;
    std::vector<double> f_values;
    // Multistart seeds for eigenvalue/Poincare minimization (the Dirichlet
    // problems are strictly convex, so those always run a single solve).
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    SolveOptions solver;

    friend bool operator==(const LadderConfig&, const LadderConfig&) = default;
};

// ell_list must have >= 3 strictly increasing positive entries; nodal load
// samples must match the cross mesh; p > 1. Throws parameter_error or
// input_error with the offending field named.
void validate_ladder(const LadderConfig& cfg);

struct LadderResult {
    ExperimentKind kind = ExperimentKind::solution_rate;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows; // ordered by ell; nan row on abort
    std::vector<std::string> fit_labels;
    std::vector<RateFit> fits;
    // Quantitative postconditions that failed (empty means all held).
    std::vector<std::string> assertion_failures;
    bool fits_degenerate = false; // not enough usable points to fit
    bool aborted = false;         // a solve failed to certify
    std::string abort_reason;
};

// rows: (ell, err_halfcyl, grad_lp). err_halfcyl is the L^p norm over the
// inner half-cylinder of the gradient of u_ell minus the extended
// cross-section solution; grad_lp is the L^p norm of the gradient of u_ell
// over the whole cylinder. Fits power and exponential models to the error.
LadderResult run_solution_rate(const LadderConfig& cfg, int workers = 1);

// rows: (ell, grad_ratio) with grad_ratio = grad_lp / ell^(m/p).
LadderResult run_gradient_bound(const LadderConfig& cfg, int workers = 1);

// rows: (ell, scaled_energy, gap, gap_times_ell) with scaled_energy the total
// energy divided by the axis volume ell^m and gap its excess over the
// cross-section minimum.
LadderResult run_energy_rate(const LadderConfig& cfg, int workers = 1);

// rows: (ell, lambda1, gap, gap_times_ell, gap_times_ell_p); fits a power law
// to the gap. The ell^-p sandwich assertions switch on for split gauges whose
// axis block matches the axis dimension.
LadderResult run_eigen_rate(const LadderConfig& cfg, int workers = 1);

// rows: (ell, c_p) with c_p the strip Poincare constant obtained from the
// smallest cross-gradient Rayleigh quotient on the strip-constrained mesh.
LadderResult run_poincare(const LadderConfig& cfg, int workers = 1);

LadderResult run_ladder(const LadderConfig& cfg, int workers = 1);

// Serialization: CSV with the exact column headers, full round-trip float
// precision; a sidecar with config, seeds, tool version, and fit summaries;
// and a gnuplot script for the CSV. write_text_atomic goes through a
// temporary file plus rename so interrupted runs never leave partial files.
std::string csv_text(const LadderResult& result);
std::string sidecar_text(const LadderConfig& cfg, const LadderResult& result);
std::string plot_script(const LadderConfig& cfg, const LadderResult& result,
                        const std::string& csv_filename);
void write_text_atomic(const std::string& path, const std::string& content);

} // namespace fpl
