#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "fpl/errors.hpp"
#include "fpl/experiments.hpp"
#include "fpl/rng.hpp"

using namespace fpl;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smallest eigenvalue of the 1D second-difference pencil on (0, L) with
// spacing h (stiffness vs lumped mass), in closed form.
double fd_eigenvalue_1d(double length, double h) {
    const double s = std::sin(kPi * h / (2.0 * length));
    return 4.0 / (h * h) * s * s;
}

LadderConfig base_config() {
    LadderConfig cfg;
    cfg.norm_text = "qnorm(2)";
    cfg.p = 2.0;
    cfg.axis_dim = 1;
    cfg.cross_box = {{0.0, 1.0}};
    cfg.h_axis = 0.125;
    cfg.h_cross = 0.125;
    cfg.ell_list = {4.0, 6.0, 8.0, 10.0};
    cfg.f_const = 1.0;
    return cfg;
}

} // namespace

TEST_CASE("experiments: power-law fit recovers exact data and its own synthesis") {
    std::vector<std::pair<double, double>> pts;
    for (double ell : {2.0, 4.0, 8.0, 16.0, 32.0}) pts.emplace_back(ell, 7.0 * std::pow(ell, -2.0));
    const RateFit fit = fit_rate(pts, RateModel::power);
    CHECK(fit.model == RateModel::power);
    CHECK(std::abs(fit.exponent_or_rate - (-2.0)) < 1e-10);
    CHECK(std::abs(fit.constant - 7.0) < 1e-10);
    CHECK(fit.r_squared > 1.0 - 1e-12);
    CHECK(fit.dropped == 0);

    // Synthesize from the fitted parameters and refit: parameters round-trip.
    std::vector<std::pair<double, double>> synth;
    for (const auto& [ell, v] : pts) {
        (void)v;
        synth.emplace_back(ell, fit.constant * std::pow(ell, fit.exponent_or_rate));
    }
    const RateFit refit = fit_rate(synth, RateModel::power);
    CHECK(std::abs(refit.exponent_or_rate - fit.exponent_or_rate) < 1e-10);
    CHECK(std::abs(refit.constant - fit.constant) < 1e-10);
}

TEST_CASE("experiments: exponential fit recovers exact decay") {
    std::vector<std::pair<double, double>> pts;
    for (double ell : {2.0, 4.0, 6.0, 8.0, 10.0})
        pts.emplace_back(ell, 3.0 * std::exp(-0.5 * ell));
    const RateFit fit = fit_rate(pts, RateModel::exponential);
    CHECK(std::abs(fit.exponent_or_rate - 0.5) < 1e-10);
    CHECK(std::abs(fit.constant - 3.0) < 1e-10);
    CHECK(fit.r_squared > 1.0 - 1e-12);
}

TEST_CASE("experiments: fits on noisy data land near the truth") {
    Rng rng(7);
    std::vector<std::pair<double, double>> pow_pts, exp_pts;
    for (double ell : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        const double wiggle = 1.0 + 0.05 * (2.0 * rng.uniform01() - 1.0);
        pow_pts.emplace_back(ell, 7.0 * std::pow(ell, -2.0) * wiggle);
    }
    for (double ell : {2.0, 4.0, 6.0, 8.0, 10.0, 12.0}) {
        const double wiggle = 1.0 + 0.05 * (2.0 * rng.uniform01() - 1.0);
        exp_pts.emplace_back(ell, 3.0 * std::exp(-0.5 * ell) * wiggle);
    }
    CHECK(std::abs(fit_rate(pow_pts, RateModel::power).exponent_or_rate - (-2.0)) < 0.15);
    CHECK(std::abs(fit_rate(exp_pts, RateModel::exponential).exponent_or_rate - 0.5) < 0.15);
}

TEST_CASE("experiments: fit filtering drops unusable points and errors below three") {
    std::vector<std::pair<double, double>> pts;
    for (double ell : {2.0, 4.0, 8.0, 16.0, 32.0}) pts.emplace_back(ell, 7.0 * std::pow(ell, -2.0));
    pts.emplace_back(40.0, 0.0);
    pts.emplace_back(48.0, -1.0);
    const RateFit fit = fit_rate(pts, RateModel::power);
    CHECK(fit.dropped == 2);
    CHECK(std::abs(fit.exponent_or_rate - (-2.0)) < 1e-10);

    // A floor removes saturated tail values.
    std::vector<std::pair<double, double>> tail = {
        {2.0, 1.0}, {4.0, 0.1}, {8.0, 0.01}, {16.0, 1e-9}, {32.0, 1e-9}};
    const RateFit floored = fit_rate(tail, RateModel::power, 1e-8);
    CHECK(floored.dropped == 2);

    std::vector<std::pair<double, double>> few = {{2.0, 1.0}, {4.0, 0.5}, {8.0, 0.0}};
    CHECK_THROWS_AS((void)fit_rate(few, RateModel::power), parameter_error);
}

TEST_CASE("experiments: solution ladder decays exponentially for a split-additive gauge") {
    LadderConfig cfg = base_config();
    cfg.kind = ExperimentKind::solution_rate;
    const LadderResult res = run_solution_rate(cfg);
    REQUIRE(!res.aborted);
    CHECK(res.columns == std::vector<std::string>{"ell", "err_halfcyl", "grad_lp"});
    REQUIRE(res.rows.size() == cfg.ell_list.size());
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        CHECK(res.rows[i][0] == cfg.ell_list[i]); // ordered by ell
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i)
        CHECK(res.rows[i + 1][1] < res.rows[i][1]); // strict decay here
    REQUIRE(res.fits.size() == 2);
    CHECK(res.fit_labels[0] == "err_power");
    CHECK(res.fit_labels[1] == "err_exponential");
    const RateFit& expfit = res.fits[1];
    CHECK(expfit.exponent_or_rate > 0.0);
    CHECK(expfit.r_squared >= 0.98);
    CHECK(expfit.r_squared >= res.fits[0].r_squared);
    CHECK(res.assertion_failures.empty());
    CHECK(!res.fits_degenerate);
}

TEST_CASE("experiments: zero load flags degenerate fits without failures") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {2.0, 3.0, 4.0};
    cfg.f_const = 0.0;
    const LadderResult res = run_solution_rate(cfg);
    REQUIRE(!res.aborted);
    CHECK(res.fits_degenerate);
    CHECK(res.fits.empty());
    CHECK(res.assertion_failures.empty());
    for (const auto& row : res.rows) CHECK(row[1] < 1e-12);
}

TEST_CASE("experiments: gradient ratio stays in a factor-2 band and scales with the load") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {4.0, 8.0, 16.0};
    cfg.kind = ExperimentKind::gradient_bound;
    const LadderResult res = run_gradient_bound(cfg);
    REQUIRE(!res.aborted);
    CHECK(res.columns == std::vector<std::string>{"ell", "grad_ratio"});
    CHECK(res.assertion_failures.empty());
    double lo = res.rows[0][1], hi = res.rows[0][1];
    for (const auto& row : res.rows) {
        lo = std::min(lo, row[1]);
        hi = std::max(hi, row[1]);
    }
    CHECK(hi <= 2.0 * lo);

    LadderConfig doubled = cfg;
    doubled.f_const = 2.0;
    const LadderResult res2 = run_gradient_bound(doubled);
    REQUIRE(!res2.aborted);
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        CHECK(std::abs(res2.rows[i][1] - 2.0 * res.rows[i][1]) < 1e-8 * res.rows[i][1]);
}

TEST_CASE("experiments: energy ladder sandwiches the cross-section minimum") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {4.0, 8.0, 16.0};
    cfg.kind = ExperimentKind::energy_rate;
    const LadderResult res = run_energy_rate(cfg);
    REQUIRE(!res.aborted);
    CHECK(res.columns ==
          std::vector<std::string>{"ell", "scaled_energy", "gap", "gap_times_ell"});
    CHECK(res.assertion_failures.empty());
    const double jinf_h = -1.0 / 24.0 + cfg.h_cross * cfg.h_cross / 24.0;
    for (const auto& row : res.rows) {
        CHECK(row[2] >= -1e-6);                    // scaled energy never undercuts
        CHECK(std::abs(row[1] - (row[2] + jinf_h)) < 1e-9); // gap is vs the h-level minimum
        CHECK(row[1] > -1.0 / 24.0);               // stays above the continuum value
    }
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i)
        CHECK(res.rows[i + 1][1] <= res.rows[i][1] + 1e-12); // scaled energy decreasing
    // gap*ell settles to a constant: band already checked by the runner
    CHECK(res.rows[0][3] > 0.0);
}

TEST_CASE("experiments: eigenvalue ladder matches the separable closed form") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {4.0, 8.0, 16.0};
    cfg.h_axis = 1.0 / 16.0;
    cfg.h_cross = 1.0 / 16.0;
    cfg.kind = ExperimentKind::eigen_rate;
    const LadderResult res = run_eigen_rate(cfg);
    REQUIRE(!res.aborted);
    CHECK(res.columns == std::vector<std::string>{"ell", "lambda1", "gap", "gap_times_ell",
                                                  "gap_times_ell_p"});
    CHECK(res.assertion_failures.empty());
    const double mu_h = fd_eigenvalue_1d(1.0, cfg.h_cross);
    for (const auto& row : res.rows) {
        const double expected = fd_eigenvalue_1d(row[0], cfg.h_axis) + mu_h;
        CHECK(std::abs(row[1] - expected) < 1e-6 * expected);
        const double mu_used = row[1] - row[2];
        CHECK(std::abs(mu_used - mu_h) < 1e-6 * mu_h);
        CHECK(std::abs(row[4] - kPi * kPi) < 0.1 * kPi * kPi); // gap*ell^2 near pi^2
    }
    REQUIRE(res.fits.size() == 1);
    CHECK(res.fit_labels[0] == "gap_power");
    CHECK(std::abs(res.fits[0].exponent_or_rate - (-2.0)) < 0.01);
    CHECK(res.fits[0].r_squared > 0.999);
}

TEST_CASE("experiments: doubling the gauge scale quarters nothing and scales lambda by 4") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {2.0, 3.0, 4.0};
    cfg.kind = ExperimentKind::eigen_rate;
    cfg.norm_text = "eucl(1)";
    const LadderResult base = run_eigen_rate(cfg);
    cfg.norm_text = "eucl(2)";
    const LadderResult scaled = run_eigen_rate(cfg);
    REQUIRE(!base.aborted);
    REQUIRE(!scaled.aborted);
    for (std::size_t i = 0; i < base.rows.size(); ++i)
        CHECK(std::abs(scaled.rows[i][1] - 4.0 * base.rows[i][1]) < 1e-7 * base.rows[i][1]);
}

TEST_CASE("experiments: split gauge with axis-aligned block enables the gap-rate checks") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {4.0, 8.0, 16.0};
    cfg.kind = ExperimentKind::eigen_rate;
    cfg.norm_text = "split(2; qnorm(2); qnorm(2))";
    const LadderResult res = run_eigen_rate(cfg);
    REQUIRE(!res.aborted);
    // The rate checks (gap*ell^p band, fitted exponent near -p) ran and held.
    CHECK(res.assertion_failures.empty());
    REQUIRE(res.fits.size() == 1);
    CHECK(std::abs(res.fits[0].exponent_or_rate - (-2.0)) < 0.3);
    double lo = res.rows[0][4], hi = res.rows[0][4];
    for (const auto& row : res.rows) {
        lo = std::min(lo, row[4]);
        hi = std::max(hi, row[4]);
    }
    CHECK(hi <= 4.0 * lo);
}

TEST_CASE("experiments: poincare constant is ell-independent and near 1/pi") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {2.0, 3.0, 4.0};
    cfg.h_axis = 0.25;
    cfg.h_cross = 1.0 / 16.0;
    cfg.kind = ExperimentKind::poincare;
    const LadderResult res = run_poincare(cfg);
    REQUIRE(!res.aborted);
    CHECK(res.columns == std::vector<std::string>{"ell", "c_p"});
    CHECK(res.assertion_failures.empty());
    for (const auto& row : res.rows) CHECK(std::abs(row[1] - 1.0 / kPi) < 0.02 / kPi);
    for (const auto& row : res.rows)
        CHECK(std::abs(row[1] - res.rows[0][1]) < 1e-6 * res.rows[0][1]);

    // Doubling the cross-section width doubles the constant (same relative h).
    LadderConfig wide = cfg;
    wide.cross_box = {{0.0, 2.0}};
    wide.h_cross = 0.125;
    const LadderResult res2 = run_poincare(wide);
    REQUIRE(!res2.aborted);
    CHECK(std::abs(res2.rows[0][1] - 2.0 * res.rows[0][1]) < 1e-3 * res.rows[0][1]);
}

TEST_CASE("experiments: repeated runs serialize identically") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {2.0, 3.0, 4.0};
    const LadderResult a = run_solution_rate(cfg);
    const LadderResult b = run_solution_rate(cfg);
    CHECK(csv_text(a) == csv_text(b));
    CHECK(sidecar_text(cfg, a) == sidecar_text(cfg, b));
    const std::string csv = csv_text(a);
    CHECK(csv.rfind("ell,err_halfcyl,grad_lp\n", 0) == 0);
}

TEST_CASE("experiments: a non-certifying solve aborts the ladder with a diagnostic row") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {2.0, 3.0, 4.0};
    cfg.h_axis = 0.25;
    cfg.h_cross = 0.25;
    cfg.norm_text = "qnorm(3)";
    cfg.p = 3.0;
    cfg.solver.max_iters = 2;
    cfg.kind = ExperimentKind::gradient_bound;
    const LadderResult res = run_gradient_bound(cfg);
    CHECK(res.aborted);
    CHECK(res.abort_reason.find("ell=2") != std::string::npos);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0][0] == 2.0);
    CHECK(std::isnan(res.rows[0][1]));
    CHECK(csv_text(res).find("nan") != std::string::npos);

    // The limit solve fails first for the solution ladder: no rows at all.
    cfg.kind = ExperimentKind::solution_rate;
    const LadderResult res2 = run_solution_rate(cfg);
    CHECK(res2.aborted);
    CHECK(res2.rows.empty());
    CHECK(res2.abort_reason.find("cross-section") != std::string::npos);
}

TEST_CASE("experiments: ladder validation rejects malformed configs") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {4.0, 8.0};
    CHECK_THROWS_AS(validate_ladder(cfg), parameter_error);
    cfg.ell_list = {4.0, 4.0, 8.0};
    CHECK_THROWS_AS(validate_ladder(cfg), parameter_error);
    cfg = base_config();
    cfg.p = 1.0;
    CHECK_THROWS_AS(validate_ladder(cfg), parameter_error);
    cfg = base_config();
    cfg.h_cross = 0.0;
    CHECK_THROWS_AS(validate_ladder(cfg), parameter_error);
    cfg = base_config();
    cfg.seeds.clear();
    CHECK_THROWS_AS(validate_ladder(cfg), parameter_error);
    cfg = base_config();
    cfg.f_values = {1.0, 2.0}; // wrong length for the cross mesh
    CHECK_THROWS_AS((void)run_solution_rate(cfg), input_error);
}

TEST_CASE("experiments: sidecar and plot script carry the run description") {
    LadderConfig cfg = base_config();
    cfg.ell_list = {2.0, 3.0, 4.0};
    const LadderResult res = run_solution_rate(cfg);
    const std::string side = sidecar_text(cfg, res);
    CHECK(side.find("tool = ") != std::string::npos);
    CHECK(side.find("norm = qnorm(2)") != std::string::npos);
    CHECK(side.find("status = ok") != std::string::npos);
    CHECK(side.find("fit err_exponential") != std::string::npos);
    CHECK(side.find("assertions = all held") != std::string::npos);

    const std::string plot = plot_script(cfg, res, "solution_rate.csv");
    CHECK(plot.find("set datafile separator ','") != std::string::npos);
    CHECK(plot.find("solution_rate.csv") != std::string::npos);
}

TEST_CASE("experiments: atomic text writes land complete and leave no temp file") {
    const std::string path = "test_atomic_write.txt";
    write_text_atomic(path, "first\n");
    write_text_atomic(path, "second\n");
    std::ifstream is(path);
    std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(content == "second\n");
    std::ifstream tmp(path + ".tmp");
    CHECK(!tmp.good());
    std::remove(path.c_str());
}
