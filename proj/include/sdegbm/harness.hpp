#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sdegbm/integrators.hpp"
#include "sdegbm/model.hpp"
#include "sdegbm/wiener.hpp"

namespace sdegbm {

enum class ErrorAt { endpoint, sup_grid };
enum class ReferenceKind { analytic, fine_scheme };

const char* error_at_str(ErrorAt e);
ErrorAt parse_error_at(const std::string& s);

struct ReportRow {
    double dt = 0.0;
    double rmse = 0.0;
    double group_std_err = 0.0;
    double cpu_seconds = 0.0;
    long aborted_paths = 0;
};

struct ConvergenceReport {
    SchemeId scheme = SchemeId::tamed_ei0;
    std::string model;
    std::vector<ReportRow> rows;  // sorted by decreasing dt
    double slope = 0.0;
    double slope_stderr = 0.0;
    long paths = 0;
    long groups = 0;
    std::uint64_t master_seed = 0;
};

struct ExperimentSpec {
    SemilinearSDE model;
    std::vector<SchemeId> schemes{SchemeId::tamed_ei0};
    std::vector<std::size_t> dt_factors;  // divisors of n_fine; dt = factor*T/n_fine
    long paths = 500;
    long groups = 20;
    std::uint64_t master_seed = 12345;
    std::size_t n_fine = std::size_t{1} << 14;
    ReferenceKind reference = ReferenceKind::fine_scheme;
    SchemeId reference_scheme = SchemeId::tamed_milstein;
    ErrorAt error_at = ErrorAt::endpoint;
    double projected_kappa = 1.0;
    double adaptive_rho = 16.0;  // fixed ratio h_max/h_min for adaptive schemes
    int threads = 0;             // 0 = hardware concurrency

    void validate() const;
};

// Exact Ginzburg-Landau solution at T driven by the lattice path; the
// pathwise integral is a trapezoid sum on the fine grid.
double gl_exact_solution(const WienerLattice& lattice, double sigma, double x0);
// Same, evaluated at every fine grid point (index n <-> time n*delta).
std::vector<double> gl_exact_path(const WienerLattice& lattice, double sigma,
                                  double x0);

// Least-squares slope of log(y) against log(x); returns (slope, stderr).
std::pair<double, double> fit_slope(
    const std::vector<std::pair<double, double>>& points);

// Coupled strong-error experiment: one report per scheme. Rows are
// reproducible bit-for-bit for any worker count; cpu_seconds stays 0 here.
std::vector<ConvergenceReport> run_convergence(const ExperimentSpec& spec);
// Same engine with per-row timing enabled (total seconds across paths).
std::vector<ConvergenceReport> efficiency_run(const ExperimentSpec& spec);

struct MomentBoundReport {
    double empirical = 0.0;
    double exact_value = 0.0;
    double bound = 0.0;
    double std_error = 0.0;
    bool pass = false;
};
// Monte Carlo check of E|Phi|^p for the scalar flow against the exact GBM
// moment and the a-priori bound exp(p(|a| + (p-1)/2 b^2) dt).
MomentBoundReport moment_bound_check(double a, double b, double p, double dt,
                                     std::size_t samples,
                                     std::uint64_t seed = 20240601);

struct RegularityReport {
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    std::vector<std::pair<double, double>> points;  // (dt, L2 norm)
};
// Fits the dt-exponent of ||Phi(dt,dW) v - v||_{L^2} for fixed v.
RegularityReport regularity_check(const Matrix& a, const std::vector<Matrix>& b,
                                  const Vec& v, const std::vector<double>& dt_ladder,
                                  std::size_t samples, std::uint64_t seed = 20240602);
RegularityReport regularity_check(double a, double b,
                                  const std::vector<double>& dt_ladder,
                                  std::size_t samples, std::uint64_t seed = 20240602);

struct StressReport {
    double em_blowup_fraction = 0.0;
    double tamed_max_norm = 0.0;
    long paths = 0;
};
// Explicit EM vs tamed flow scheme on the cubic test equation over shared
// Brownian paths; EM divergence is the measured outcome, not an error.
StressReport stress_divergence(double dt, long paths, double x0 = 3.0,
                               double sigma = 2.0, std::uint64_t seed = 12345,
                               int threads = 0);

std::string format_g17(double v);
void write_report_csv(const std::vector<ConvergenceReport>& reports,
                      const std::string& path);
std::vector<ConvergenceReport> read_report_csv(const std::string& path);
void write_slope_csv(const std::vector<ConvergenceReport>& reports,
                     const std::string& path);

// Runs fn(0..n-1) on a small thread pool. Callers write results into
// preallocated slots so the schedule never shows in the output.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace sdegbm
