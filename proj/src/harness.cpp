#include "sdegbm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sdegbm/errors.hpp"
#include "sdegbm/flow.hpp"
#include "sdegbm/rng.hpp"

namespace sdegbm {

namespace {

struct KahanSum {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double sq_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

const char* error_at_str(ErrorAt e) {
    return e == ErrorAt::endpoint ? "endpoint" : "sup_grid";
}

ErrorAt parse_error_at(const std::string& s) {
    if (s == "endpoint") return ErrorAt::endpoint;
    if (s == "sup_grid") return ErrorAt::sup_grid;
    throw ConfigError("run.error_at must be endpoint or sup_grid, got " + s);
}

void ExperimentSpec::validate() const {
    model.validate();
    if (paths < 1) throw ConfigError("run.M must be >= 1");
    if (groups < 1) throw ConfigError("run.groups must be >= 1");
    if (paths % groups != 0) throw ConfigError("run.groups must divide run.M");
    if (n_fine < 1) throw ConfigError("run.N_fine must be >= 1");
    if (schemes.empty()) throw ConfigError("run.schemes must not be empty");
    if (dt_factors.empty()) throw ConfigError("run.dt_factors must not be empty");
    for (std::size_t f : dt_factors) {
        if (f == 0 || n_fine % f != 0)
            throw ConfigError("run.dt_factors: " + std::to_string(f) +
                              " does not divide run.N_fine");
    }
    if (reference == ReferenceKind::analytic) {
        if (model.name != "ginzburg_landau" || model.d != 1)
            throw ConfigError("run.reference=analytic is only available for the "
                              "ginzburg_landau model");
    } else if (is_adaptive(reference_scheme)) {
        throw ConfigError("run.reference must be a fixed-step scheme");
    }
    for (SchemeId s : schemes) {
        if (is_adaptive(s)) {
            for (std::size_t f : dt_factors)
                if (static_cast<double>(f) < adaptive_rho * (1.0 - 1e-12))
                    throw ConfigError(
                        "adaptive.rho exceeds dt factor " + std::to_string(f) +
                        "; h_min would fall below the fine lattice");
        }
    }
}

double gl_exact_solution(const WienerLattice& lattice, double sigma, double x0) {
    return gl_exact_path(lattice, sigma, x0).back();
}

std::vector<double> gl_exact_path(const WienerLattice& lattice, double sigma,
                                  double x0) {
    if (lattice.m != 1) throw ConfigError("gl_exact: lattice must have one driver");
    if (!(sigma > 0.0)) throw ConfigError("gl_exact: sigma must be positive");
    const std::size_t n = lattice.n_fine;
    const double delta = lattice.delta;
    const double sqs = std::sqrt(sigma);

    std::vector<double> out(n + 1);
    double w = 0.0;
    double integral = 0.0;  // trapezoid of exp(-2s + 2 sqrt(sigma) W_s)
    double f_prev = 1.0;    // integrand at s = 0
    out[0] = x0;
    for (std::size_t k = 1; k <= n; ++k) {
        w += lattice.at(0, k - 1);
        const double t = static_cast<double>(k) * delta;
        const double f = std::exp(-2.0 * t + 2.0 * sqs * w);
        integral += 0.5 * delta * (f_prev + f);
        f_prev = f;
        out[k] = x0 * std::exp(-t + sqs * w) /
                 std::sqrt(1.0 + 2.0 * x0 * x0 * integral);
    }
    return out;
}

std::pair<double, double> fit_slope(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw ConfigError("fit_slope: need at least 2 points");
    const std::size_t n = points.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
            throw ConfigError("fit_slope: values must be positive");
        xs[i] = std::log(points[i].first);
        ys[i] = std::log(points[i].second);
        sx += xs[i];
        sy += ys[i];
    }
    const double xbar = sx / static_cast<double>(n);
    const double ybar = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx == 0.0) throw ConfigError("fit_slope: degenerate abscissae");
    const double slope = sxy / sxx;
    double stderr_ = 0.0;
    if (n > 2) {
        const double intercept = ybar - slope * xbar;
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (intercept + slope * xs[i]);
            ssr += r * r;
        }
        stderr_ = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    }
    return {slope, stderr_};
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0
        ? static_cast<std::size_t>(threads)
        : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct Cell {
    std::vector<double> sq_err;   // per path
    std::vector<double> seconds;  // per path
    std::vector<char> aborted;    // per path
};

// Reference values for one path: endpoint state, or the whole fine-grid
// path when errors are measured as sup over shared grid points.
struct ReferenceValues {
    Vec endpoint;
    std::vector<Vec> fine_states;  // indexed by fine grid index
};

double path_error_sq(const Trajectory& traj, const ReferenceValues& ref,
                     ErrorAt mode, double delta) {
    if (mode == ErrorAt::endpoint)
        return sq_dist(traj.final_state(), ref.endpoint);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto idx = static_cast<std::size_t>(std::llround(traj.times[i] / delta));
        worst = std::max(worst, sq_dist(traj.states[i], ref.fine_states[idx]));
    }
    return worst;
}

std::vector<ConvergenceReport> run_engine(const ExperimentSpec& spec, bool measure_time) {
    spec.validate();
    const SemilinearSDE& model = spec.model;
    const double delta = model.T / static_cast<double>(spec.n_fine);
    const auto paths = static_cast<std::size_t>(spec.paths);

    std::vector<std::size_t> factors = spec.dt_factors;
    std::sort(factors.begin(), factors.end(), std::greater<>());
    factors.erase(std::unique(factors.begin(), factors.end()), factors.end());

    const std::size_t n_schemes = spec.schemes.size();
    const std::size_t n_factors = factors.size();
    std::vector<Cell> cells(n_schemes * n_factors);
    for (auto& c : cells) {
        c.sq_err.assign(paths, 0.0);
        c.seconds.assign(paths, 0.0);
        c.aborted.assign(paths, 0);
    }
    std::vector<char> ref_aborted(paths, 0);

    const bool need_fine_path = spec.error_at == ErrorAt::sup_grid;
    const double gl_sigma = spec.reference == ReferenceKind::analytic
        ? model.B[0](0, 0) * model.B[0](0, 0) : 0.0;

    auto run_path = [&](std::size_t p) {
        const WienerLattice lattice =
            sample_lattice(spec.master_seed, p, model.m, spec.n_fine, model.T);

        ReferenceValues ref;
        try {
            if (spec.reference == ReferenceKind::analytic) {
                const std::vector<double> exact =
                    gl_exact_path(lattice, gl_sigma, model.x0[0]);
                ref.endpoint = {exact.back()};
                if (need_fine_path) {
                    ref.fine_states.resize(exact.size());
                    for (std::size_t i = 0; i < exact.size(); ++i)
                        ref.fine_states[i] = {exact[i]};
                }
            } else {
                Trajectory fine = integrate_fixed(spec.reference_scheme, model,
                                                  lattice, 1, spec.projected_kappa);
                ref.endpoint = fine.final_state();
                if (need_fine_path) ref.fine_states = std::move(fine.states);
            }
        } catch (const OverflowError&) {
            ref_aborted[p] = 1;
            return;
        }

        for (std::size_t si = 0; si < n_schemes; ++si) {
            const SchemeId scheme = spec.schemes[si];
            for (std::size_t fi = 0; fi < n_factors; ++fi) {
                Cell& cell = cells[si * n_factors + fi];
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    Trajectory traj;
                    if (is_adaptive(scheme)) {
                        const AdaptiveConfig cfg(
                            static_cast<double>(factors[fi]) * delta,
                            spec.adaptive_rho, delta);
                        traj = integrate_adaptive(scheme, model, lattice, cfg);
                    } else {
                        traj = integrate_fixed(scheme, model, lattice, factors[fi],
                                               spec.projected_kappa);
                    }
                    cell.sq_err[p] = path_error_sq(traj, ref, spec.error_at, delta);
                } catch (const OverflowError&) {
                    cell.aborted[p] = 1;
                }
                if (measure_time) {
                    const auto t1 = std::chrono::steady_clock::now();
                    cell.seconds[p] =
                        std::chrono::duration<double>(t1 - t0).count();
                }
            }
        }
    };
    parallel_for(paths, spec.threads, run_path);

    // Deterministic reduction in fixed path order.
    std::vector<ConvergenceReport> reports;
    reports.reserve(n_schemes);
    const std::size_t block = paths / static_cast<std::size_t>(spec.groups);
    for (std::size_t si = 0; si < n_schemes; ++si) {
        ConvergenceReport rep;
        rep.scheme = spec.schemes[si];
        rep.model = model.name;
        rep.paths = spec.paths;
        rep.groups = spec.groups;
        rep.master_seed = spec.master_seed;
        for (std::size_t fi = 0; fi < n_factors; ++fi) {
            const Cell& cell = cells[si * n_factors + fi];
            ReportRow row;
            row.dt = static_cast<double>(factors[fi]) * delta;

            KahanSum total;
            long valid = 0;
            std::vector<double> group_rmse;
            for (long g = 0; g < spec.groups; ++g) {
                KahanSum gsum;
                long gvalid = 0;
                for (std::size_t p = static_cast<std::size_t>(g) * block;
                     p < static_cast<std::size_t>(g + 1) * block; ++p) {
                    if (cell.aborted[p] || ref_aborted[p]) continue;
                    gsum.add(cell.sq_err[p]);
                    total.add(cell.sq_err[p]);
                    ++gvalid;
                }
                valid += gvalid;
                if (gvalid > 0)
                    group_rmse.push_back(
                        std::sqrt(gsum.sum / static_cast<double>(gvalid)));
            }
            row.rmse = valid > 0 ? std::sqrt(total.sum / static_cast<double>(valid)) : 0.0;
            if (group_rmse.size() > 1) {
                double mean = 0.0;
                for (double v : group_rmse) mean += v;
                mean /= static_cast<double>(group_rmse.size());
                double var = 0.0;
                for (double v : group_rmse) var += (v - mean) * (v - mean);
                var /= static_cast<double>(group_rmse.size() - 1);
                row.group_std_err =
                    std::sqrt(var / static_cast<double>(group_rmse.size()));
            }
            if (measure_time) {
                KahanSum secs;
                for (double s : cell.seconds) secs.add(s);
                row.cpu_seconds = secs.sum;
            }
            for (std::size_t p = 0; p < paths; ++p)
                if (cell.aborted[p] || ref_aborted[p]) ++row.aborted_paths;
            rep.rows.push_back(row);
        }
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : rep.rows)
            if (row.rmse > 0.0) pts.push_back({row.dt, row.rmse});
        if (pts.size() >= 2) {
            const auto [slope, se] = fit_slope(pts);
            rep.slope = slope;
            rep.slope_stderr = se;
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace

std::vector<ConvergenceReport> run_convergence(const ExperimentSpec& spec) {
    return run_engine(spec, false);
}

std::vector<ConvergenceReport> efficiency_run(const ExperimentSpec& spec) {
    return run_engine(spec, true);
}

MomentBoundReport moment_bound_check(double a, double b, double p, double dt,
                                     std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw ConfigError("moment_bound_check: need samples >= 2");
    RandomStream stream(seed, 0);
    const double scale = std::sqrt(dt);
    // Welford accumulation keeps mean and variance in one deterministic pass.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double dw = scale * stream.next_normal();
        const double phi = std::exp((a - 0.5 * b * b) * dt + b * dw);
        const double x = std::pow(std::abs(phi), p);
        const double d1 = x - mean;
        mean += d1 / static_cast<double>(i + 1);
        m2 += d1 * (x - mean);
    }
    MomentBoundReport rep;
    rep.empirical = mean;
    rep.exact_value = std::exp(p * a * dt + 0.5 * p * (p - 1.0) * b * b * dt);
    rep.bound = std::exp(p * (std::abs(a) + 0.5 * (p - 1.0) * b * b) * dt);
    rep.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) /
                              static_cast<double>(samples));
    const bool close = std::abs(rep.empirical - rep.exact_value) <=
                       4.0 * rep.std_error + 1e-12 * rep.exact_value;
    const bool below = rep.empirical <=
                       rep.bound * (1.0 + 4.0 * rep.std_error / rep.exact_value);
    rep.pass = close && below;
    return rep;
}

RegularityReport regularity_check(const Matrix& a, const std::vector<Matrix>& b,
                                  const Vec& v, const std::vector<double>& dt_ladder,
                                  std::size_t samples, std::uint64_t seed) {
    if (norm2(v) == 0.0)
        throw ConfigError("regularity_check: degenerate input, v must be nonzero");
    if (dt_ladder.size() < 2)
        throw ConfigError("regularity_check: need at least 2 dt values");
    const GbmFlow flow(a, b);
    const std::size_t m = b.size();

    RegularityReport rep;
    for (std::size_t li = 0; li < dt_ladder.size(); ++li) {
        const double dt = dt_ladder[li];
        RandomStream stream(seed, li);
        const double scale = std::sqrt(dt);
        KahanSum acc;
        Vec dw(m);
        for (std::size_t i = 0; i < samples; ++i) {
            for (std::size_t k = 0; k < m; ++k) dw[k] = scale * stream.next_normal();
            const Vec pv = flow.apply(dt, dw, v);
            acc.add(sq_dist(pv, v));
        }
        rep.points.push_back(
            {dt, std::sqrt(acc.sum / static_cast<double>(samples))});
    }
    const auto [slope, se] = fit_slope(rep.points);
    rep.exponent = slope;
    rep.exponent_stderr = se;
    return rep;
}

RegularityReport regularity_check(double a, double b,
                                  const std::vector<double>& dt_ladder,
                                  std::size_t samples, std::uint64_t seed) {
    return regularity_check(Matrix::diagonal({a}), {Matrix::diagonal({b})},
                            Vec{1.0}, dt_ladder, samples, seed);
}

StressReport stress_divergence(double dt, long paths, double x0, double sigma,
                               std::uint64_t seed, int threads) {
    if (!(dt > 0.0)) throw ConfigError("stress: dt must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    if (n_steps < 1 || std::abs(n_steps * dt - 1.0) > 1e-9)
        throw ConfigError("stress: dt must divide the horizon T=1");

    SemilinearSDE model = builtin_model(ModelName::ginzburg_landau, {{"sigma", sigma}});
    model.x0 = {x0};

    constexpr double kBlowup = 1e6;
    const auto n_paths = static_cast<std::size_t>(paths);
    std::vector<char> blown(n_paths, 0);
    std::vector<double> tamed_max(n_paths, 0.0);

    parallel_for(n_paths, threads, [&](std::size_t p) {
        const WienerLattice lattice = sample_lattice(seed, p, 1, n_steps, 1.0);
        // Explicit untamed EM with the same increments.
        Vec y = model.x0;
        for (std::size_t n = 0; n < n_steps; ++n) {
            const double t = static_cast<double>(n) * lattice.delta;
            y = step_explicit_em(model, y, t, lattice.delta,
                                 {lattice.at(0, n)});
            if (!all_finite(y) || norm2(y) > kBlowup) {
                blown[p] = 1;
                break;
            }
        }
        const Trajectory tamed = integrate_fixed(SchemeId::tamed_ei0, model, lattice, 1);
        double worst = 0.0;
        for (const Vec& s : tamed.states) worst = std::max(worst, norm2(s));
        tamed_max[p] = worst;
    });

    StressReport rep;
    rep.paths = paths;
    long count = 0;
    for (char b : blown) count += b;
    rep.em_blowup_fraction = static_cast<double>(count) / static_cast<double>(paths);
    for (double v : tamed_max) rep.tamed_max_norm = std::max(rep.tamed_max_norm, v);
    return rep;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_report_csv(const std::vector<ConvergenceReport>& reports,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_report_csv: cannot open " + path);
    const std::uint64_t seed = reports.empty() ? 0 : reports.front().master_seed;
    const long paths = reports.empty() ? 0 : reports.front().paths;
    const long groups = reports.empty() ? 0 : reports.front().groups;
    out << "# seed=" << seed << " paths=" << paths << " groups=" << groups << "\n";
    out << "scheme,model,dt,rmse,group_std_err,cpu_seconds,aborted_paths\n";
    for (const auto& rep : reports)
        for (const auto& row : rep.rows)
            out << scheme_name(rep.scheme) << ',' << rep.model << ','
                << format_g17(row.dt) << ',' << format_g17(row.rmse) << ','
                << format_g17(row.group_std_err) << ','
                << format_g17(row.cpu_seconds) << ',' << row.aborted_paths << '\n';
    if (!out) throw ConfigError("write_report_csv: write failed for " + path);
}

std::vector<ConvergenceReport> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("read_report_csv: cannot open " + path);
    std::uint64_t seed = 0;
    long paths = 0, groups = 0;
    std::vector<ConvergenceReport> reports;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            unsigned long long s = 0;
            if (std::sscanf(line.c_str(), "# seed=%llu paths=%ld groups=%ld", &s,
                            &paths, &groups) >= 1)
                seed = s;
            continue;
        }
        if (!header_seen) {  // column header
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string scheme, model, field;
        std::getline(ss, scheme, ',');
        std::getline(ss, model, ',');
        ReportRow row;
        std::getline(ss, field, ',');
        row.dt = std::strtod(field.c_str(), nullptr);
        std::getline(ss, field, ',');
        row.rmse = std::strtod(field.c_str(), nullptr);
        std::getline(ss, field, ',');
        row.group_std_err = std::strtod(field.c_str(), nullptr);
        std::getline(ss, field, ',');
        row.cpu_seconds = std::strtod(field.c_str(), nullptr);
        std::getline(ss, field, ',');
        row.aborted_paths = std::strtol(field.c_str(), nullptr, 10);

        const SchemeId id = parse_scheme(scheme);
        if (reports.empty() || reports.back().scheme != id ||
            reports.back().model != model) {
            ConvergenceReport rep;
            rep.scheme = id;
            rep.model = model;
            rep.master_seed = seed;
            rep.paths = paths;
            rep.groups = groups;
            reports.push_back(std::move(rep));
        }
        reports.back().rows.push_back(row);
    }
    for (auto& rep : reports) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : rep.rows)
            if (row.rmse > 0.0) pts.push_back({row.dt, row.rmse});
        if (pts.size() >= 2) {
            const auto [slope, se] = fit_slope(pts);
            rep.slope = slope;
            rep.slope_stderr = se;
        }
    }
    return reports;
}

void write_slope_csv(const std::vector<ConvergenceReport>& reports,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_slope_csv: cannot open " + path);
    const std::uint64_t seed = reports.empty() ? 0 : reports.front().master_seed;
    out << "# seed=" << seed << "\n";
    out << "scheme,model,slope,slope_stderr\n";
    for (const auto& rep : reports)
        out << scheme_name(rep.scheme) << ',' << rep.model << ','
            << format_g17(rep.slope) << ',' << format_g17(rep.slope_stderr) << '\n';
    if (!out) throw ConfigError("write_slope_csv: write failed for " + path);
}

}  // namespace sdegbm
