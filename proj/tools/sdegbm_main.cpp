// Command-line front end: binds key=value configs to the benchmark harness
// and emits CSV artifacts.
//
// Exit codes: 0 success, 1 configuration error, 2 numeric failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sdegbm/config.hpp"
#include "sdegbm/errors.hpp"
#include "sdegbm/harness.hpp"
#include "sdegbm/integrators.hpp"
#include "sdegbm/model.hpp"
#include "sdegbm/spectral_spde.hpp"
#include "sdegbm/wiener.hpp"

namespace {

using namespace sdegbm;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_override = -1;
    int threads = 0;
    std::vector<std::string> overrides;
};

KeyValueConfig load_config(const CommonOpts& opts) {
    KeyValueConfig cfg;
    if (!opts.config_path.empty()) cfg = KeyValueConfig::from_file(opts.config_path);
    for (const std::string& line : opts.overrides) cfg.set_line(line);
    if (opts.seed_override >= 0)
        cfg.set("run.seed", std::to_string(opts.seed_override));
    cfg.require_known_keys(known_config_keys());
    return cfg;
}

Params collect_model_params(const KeyValueConfig& cfg, const Params& defaults) {
    Params params = defaults;
    for (const auto& [key, value] : cfg.entries()) {
        if (key.rfind("model.", 0) != 0 || key == "model.name") continue;
        (void)value;
        params[key.substr(6)] = cfg.get_double(key, 0.0);
    }
    return params;
}

SemilinearSDE build_builtin(const KeyValueConfig& cfg) {
    const ModelName name =
        parse_model_name(cfg.get_string("model.name", "ginzburg_landau"));
    SemilinearSDE model = builtin_model(name, collect_model_params(cfg, default_params(name)));
    model.T = cfg.get_double("run.T", model.T);
    if (!(model.T > 0.0)) throw ConfigError("run.T must be positive");
    return model;
}

std::vector<std::size_t> resolve_dt_factors(const KeyValueConfig& cfg,
                                            std::size_t n_fine) {
    std::vector<std::size_t> factors;
    if (cfg.has("run.dt_factors")) {
        for (const std::string& item : cfg.get_list("run.dt_factors")) {
            const long v = std::strtol(item.c_str(), nullptr, 10);
            if (v < 1) throw ConfigError("run.dt_factors: bad entry " + item);
            factors.push_back(static_cast<std::size_t>(v));
        }
    } else {
        for (int shift = 4; shift <= 9; ++shift) {
            const std::size_t f = n_fine >> shift;
            if (f >= 1) factors.push_back(f);
        }
        if (factors.empty()) factors.push_back(1);
    }
    return factors;
}

ExperimentSpec build_spec(const KeyValueConfig& cfg, SemilinearSDE model,
                          const CommonOpts& opts, std::size_t default_n_fine,
                          const std::string& default_reference) {
    ExperimentSpec spec;
    spec.model = std::move(model);
    spec.paths = cfg.get_long("run.M", 500);
    spec.groups = cfg.get_long("run.groups", 20);
    spec.master_seed = cfg.get_u64("run.seed", 12345);
    spec.n_fine = static_cast<std::size_t>(
        cfg.get_long("run.N_fine", static_cast<long>(default_n_fine)));
    spec.dt_factors = resolve_dt_factors(cfg, spec.n_fine);
    spec.threads = opts.threads;
    spec.error_at = parse_error_at(cfg.get_string("run.error_at", "endpoint"));
    spec.projected_kappa = cfg.get_double("projected.kappa", 1.0);
    spec.adaptive_rho = cfg.get_double("adaptive.rho", 16.0);

    spec.schemes.clear();
    const std::vector<std::string> names = cfg.get_list("run.schemes");
    if (names.empty()) {
        spec.schemes.push_back(SchemeId::tamed_ei0);
    } else {
        for (const std::string& n : names) spec.schemes.push_back(parse_scheme(n));
    }

    const std::string ref = cfg.get_string("run.reference", default_reference);
    if (ref == "analytic") {
        spec.reference = ReferenceKind::analytic;
    } else {
        spec.reference = ReferenceKind::fine_scheme;
        spec.reference_scheme = parse_scheme(ref);
    }
    return spec;
}

void echo_resolved(const KeyValueConfig& cfg, const ExperimentSpec* spec,
                   const std::string& model_name) {
    KeyValueConfig resolved = cfg;
    resolved.set("model.name", model_name);
    if (spec) {
        resolved.set("run.T", format_g17(spec->model.T));
        resolved.set("run.M", std::to_string(spec->paths));
        resolved.set("run.groups", std::to_string(spec->groups));
        resolved.set("run.seed", std::to_string(spec->master_seed));
        resolved.set("run.N_fine", std::to_string(spec->n_fine));
        std::string factors, schemes;
        for (std::size_t f : spec->dt_factors)
            factors += (factors.empty() ? "" : ",") + std::to_string(f);
        for (SchemeId s : spec->schemes)
            schemes += (schemes.empty() ? "" : ",") + std::string(scheme_name(s));
        resolved.set("run.dt_factors", factors);
        resolved.set("run.schemes", schemes);
        resolved.set("run.reference", spec->reference == ReferenceKind::analytic
                                          ? "analytic"
                                          : scheme_name(spec->reference_scheme));
        resolved.set("run.error_at", error_at_str(spec->error_at));
        resolved.set("adaptive.rho", format_g17(spec->adaptive_rho));
        resolved.set("projected.kappa", format_g17(spec->projected_kappa));
    }
    std::cout << "# resolved configuration\n";
    for (const auto& [k, v] : resolved.entries())
        std::cout << k << "=" << v << "\n";
}

std::string out_path(const CommonOpts& opts, const std::string& file) {
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / file).string();
}

// Any fully-aborted row means the report carries no usable error estimate.
int check_aborts(const std::vector<ConvergenceReport>& reports) {
    for (const auto& rep : reports)
        for (const auto& row : rep.rows)
            if (row.aborted_paths >= rep.paths) {
                std::cerr << "numeric failure: all paths aborted for scheme "
                          << scheme_name(rep.scheme) << " at dt=" << row.dt << "\n";
                return 2;
            }
    return 0;
}

int cmd_validate(const CommonOpts& opts) {
    const KeyValueConfig cfg = load_config(opts);
    const SemilinearSDE model = build_builtin(cfg);
    echo_resolved(cfg, nullptr, model.name);
    const CommutativityReport rep = validate_commutativity(model, 1e-10);
    std::cout << "model=" << model.name
              << " max_AB_commutator=" << format_g17(rep.max_ab_commutator)
              << " max_BB_commutator=" << format_g17(rep.max_bb_commutator)
              << " tolerance=" << format_g17(rep.tolerance)
              << " pass=" << (rep.pass ? "true" : "false") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_simulate(const CommonOpts& opts) {
    const KeyValueConfig cfg = load_config(opts);
    SemilinearSDE model = build_builtin(cfg);
    const std::string default_ref =
        model.name == "ginzburg_landau" ? "analytic" : "tamed_milstein";
    ExperimentSpec spec = build_spec(cfg, std::move(model), opts, 1u << 14,
                                     default_ref);
    echo_resolved(cfg, &spec, spec.model.name);

    const WienerLattice lattice = sample_lattice(
        spec.master_seed, 0, spec.model.m, spec.n_fine, spec.model.T);
    const SchemeId scheme = spec.schemes.front();
    Trajectory traj;
    if (is_adaptive(scheme)) {
        const double delta = spec.model.T / static_cast<double>(spec.n_fine);
        const double h_max = cfg.get_double(
            "adaptive.h_max", static_cast<double>(spec.dt_factors.front()) * delta);
        traj = integrate_adaptive(scheme, spec.model, lattice,
                                  AdaptiveConfig(h_max, spec.adaptive_rho, delta));
    } else {
        traj = integrate_fixed(scheme, spec.model, lattice,
                               spec.dt_factors.front(), spec.projected_kappa);
    }

    const std::string path = out_path(opts, "trajectory.csv");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "# seed=" << spec.master_seed << " scheme=" << scheme_name(scheme)
        << " model=" << spec.model.name << "\n";
    out << "time";
    for (std::size_t i = 0; i < spec.model.d; ++i) out << ",y" << i;
    out << "\n";
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        out << format_g17(traj.times[n]);
        for (double v : traj.states[n]) out << ',' << format_g17(v);
        out << "\n";
    }
    std::cout << "wrote " << path << " (" << traj.times.size() << " rows, backstops="
              << traj.backstop_count << ", domain_violations="
              << traj.domain_violations << ")\n";
    return 0;
}

int run_reports(const CommonOpts& opts, const ExperimentSpec& spec,
                const KeyValueConfig& cfg, bool efficiency) {
    echo_resolved(cfg, &spec, spec.model.name);
    const std::vector<ConvergenceReport> reports =
        efficiency ? efficiency_run(spec) : run_convergence(spec);
    const std::string rows_csv =
        out_path(opts, efficiency ? "efficiency.csv" : "convergence.csv");
    write_report_csv(reports, rows_csv);
    write_slope_csv(reports, out_path(opts, "slopes.csv"));
    for (const auto& rep : reports)
        std::cout << "scheme=" << scheme_name(rep.scheme) << " model=" << rep.model
                  << " slope=" << format_g17(rep.slope)
                  << " slope_stderr=" << format_g17(rep.slope_stderr) << "\n";
    std::cout << "wrote " << rows_csv << "\n";
    return check_aborts(reports);
}

int cmd_converge(const CommonOpts& opts, bool efficiency) {
    const KeyValueConfig cfg = load_config(opts);
    SemilinearSDE model = build_builtin(cfg);
    const std::string default_ref =
        model.name == "ginzburg_landau" ? "analytic" : "tamed_milstein";
    const ExperimentSpec spec =
        build_spec(cfg, std::move(model), opts, 1u << 14, default_ref);
    return run_reports(opts, spec, cfg, efficiency);
}

int cmd_stress(const CommonOpts& opts) {
    const KeyValueConfig cfg = load_config(opts);
    const double sigma = cfg.get_double("model.sigma", 2.0);
    const long paths = cfg.get_long("run.M", 1000);
    const std::uint64_t seed = cfg.get_u64("run.seed", 20240603);
    double dt = 0.25;
    if (cfg.has("run.dt_factors")) {
        const auto n_fine =
            static_cast<double>(cfg.get_long("run.N_fine", 1 << 14));
        const double t = cfg.get_double("run.T", 1.0);
        dt = std::strtod(cfg.get_list("run.dt_factors").front().c_str(), nullptr) *
             t / n_fine;
    }
    echo_resolved(cfg, nullptr, "ginzburg_landau");
    const StressReport rep = stress_divergence(dt, paths, 3.0, sigma, seed,
                                               opts.threads);
    std::cout << "dt=" << format_g17(dt) << " paths=" << rep.paths
              << " em_blowup_fraction=" << format_g17(rep.em_blowup_fraction)
              << " tamed_max_norm=" << format_g17(rep.tamed_max_norm) << "\n";
    return 0;
}

int cmd_spde(const CommonOpts& opts) {
    const KeyValueConfig cfg = load_config(opts);
    SpdeConfig scfg;
    scfg.d = static_cast<std::size_t>(cfg.get_long("spde.d", 32));
    scfg.grid_size = static_cast<std::size_t>(cfg.get_long("spde.grid_size", 0));
    scfg.epsilon = cfg.get_double("model.epsilon", 1.0);
    scfg.gamma = cfg.get_double("model.gamma", 1.0);
    scfg.alpha = cfg.get_double("model.alpha", 0.0);
    scfg.beta = cfg.get_double("model.beta", 1.0);
    scfg.T = cfg.get_double("run.T", 1.0);
    SemilinearSDE model = build_spde_model(scfg);

    const bool nonlinear_noise = scfg.alpha != 0.0;
    const std::string default_ref =
        nonlinear_noise ? "tamed_ei0_general" : "tamed_ei0";
    ExperimentSpec spec =
        build_spec(cfg, std::move(model), opts, 1u << 12, default_ref);
    if (!cfg.has("run.schemes"))
        spec.schemes = {nonlinear_noise ? SchemeId::tamed_ei0_general
                                        : SchemeId::tamed_ei0};
    return run_reports(opts, spec, cfg, false);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strong-convergence benchmark for GBM-based tamed exponential integrators"};
    app.require_subcommand(1);

    std::map<std::string, CommonOpts> opts;
    for (const char* name : {"validate", "simulate", "converge", "efficiency",
                             "stress", "spde"}) {
        CLI::App* sub = app.add_subcommand(name);
        CommonOpts& o = opts[name];
        sub->add_option("--config", o.config_path, "key=value config file");
        sub->add_option("--out", o.out_dir, "artifact directory");
        sub->add_option("--seed", o.seed_override, "override run.seed");
        sub->add_option("--threads", o.threads, "worker threads (0 = hardware)");
        sub->add_option("overrides", o.overrides, "inline key=value overrides");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "validate") return cmd_validate(opts[name]);
        if (name == "simulate") return cmd_simulate(opts[name]);
        if (name == "converge") return cmd_converge(opts[name], false);
        if (name == "efficiency") return cmd_converge(opts[name], true);
        if (name == "stress") return cmd_stress(opts[name]);
        if (name == "spde") return cmd_spde(opts[name]);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
