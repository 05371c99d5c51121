#include "sdegbm/integrators.hpp"

#include <algorithm>
#include <cmath>

namespace sdegbm {

const char* scheme_name(SchemeId id) {
    switch (id) {
        case SchemeId::ei0: return "ei0";
        case SchemeId::tamed_ei0: return "tamed_ei0";
        case SchemeId::tamed_ei0_general: return "tamed_ei0_general";
        case SchemeId::adaptive_gbm: return "adaptive_gbm";
        case SchemeId::tamed_em: return "tamed_em";
        case SchemeId::tamed_milstein: return "tamed_milstein";
        case SchemeId::projected_milstein: return "projected_milstein";
        case SchemeId::adaptive_milstein: return "adaptive_milstein";
    }
    return "?";
}

SchemeId parse_scheme(const std::string& s) {
    if (s == "ei0") return SchemeId::ei0;
    if (s == "tamed_ei0") return SchemeId::tamed_ei0;
    if (s == "tamed_ei0_general") return SchemeId::tamed_ei0_general;
    if (s == "adaptive_gbm") return SchemeId::adaptive_gbm;
    if (s == "tamed_em") return SchemeId::tamed_em;
    if (s == "tamed_milstein") return SchemeId::tamed_milstein;
    if (s == "projected_milstein") return SchemeId::projected_milstein;
    if (s == "adaptive_milstein") return SchemeId::adaptive_milstein;
    throw ConfigError("unknown scheme: " + s);
}

bool is_adaptive(SchemeId id) {
    return id == SchemeId::adaptive_gbm || id == SchemeId::adaptive_milstein;
}

OverflowError::OverflowError(SchemeId s, std::size_t n)
    : NumericError("scheme " + std::string(scheme_name(s)) +
                   ": non-finite state at step " + std::to_string(n)),
      scheme(s), step(n) {}

AdaptiveConfig::AdaptiveConfig(double h_max_, double rho_, double fine_delta_)
    : h_max(h_max_), rho(rho_), fine_delta(fine_delta_) {
    if (!(h_max > 0.0)) throw ConfigError("adaptive.h_max must be positive");
    if (!(rho >= 1.0)) throw ConfigError("adaptive.rho must be >= 1");
    if (!(fine_delta > 0.0)) throw ConfigError("adaptive: fine_delta must be positive");
    if (h_min() < fine_delta * (1.0 - 1e-12))
        throw ConfigError("adaptive: h_min = h_max/rho is below the fine lattice spacing");
}

Vec tame(const Vec& f_val, double dt) {
    if (!(dt > 0.0)) throw ConfigError("tame: dt must be positive");
    if (!all_finite(f_val)) throw NumericError("tame: non-finite drift value");
    const double scale = 1.0 / (1.0 + dt * norm2(f_val));
    return scaled(f_val, scale);
}

Vec step_tamed_ei0(const SemilinearSDE& model, const GbmFlow& flow, const Vec& y,
                   double t, double dt, const Vec& dW, bool tamed) {
    Vec f = model.nonlinear_drift(y, t);
    if (tamed) f = tame(f, dt);
    Vec inner = y;
    axpy(inner, dt, f);
    return flow.apply(dt, dW, inner);
}

Vec step_tamed_ei0_general(const SemilinearSDE& model, const GbmFlow& flow,
                           const Vec& y, double t, double dt, const Vec& dW,
                           bool tamed) {
    if (!model.has_g())
        throw ConfigError("tamed_ei0_general: model has no nonlinear diffusion g");
    Vec f = model.nonlinear_drift(y, t);
    if (tamed) f = tame(f, dt);

    const Matrix gcols = model.stacked_g(y, t);  // d x m
    Vec inner = y;
    axpy(inner, dt, f);
    for (std::size_t i = 0; i < model.m; ++i) {
        Vec gi(model.d);
        for (std::size_t r = 0; r < model.d; ++r) gi[r] = gcols(r, i);
        const Vec bg = model.B[i].apply(gi);
        axpy(inner, -dt, bg);     // Ito correction -sum B_i g_i dt
        axpy(inner, dW[i], gi);   // + sum g_i dW_i
    }
    return flow.apply(dt, dW, inner);
}

namespace {

// Total diffusion columns sigma_i(y) = B_i y + g_i(y), d x m.
Matrix diffusion_columns(const SemilinearSDE& model, const Vec& y, double t) {
    Matrix s(model.d, model.m);
    for (std::size_t i = 0; i < model.m; ++i) {
        const Vec by = model.B[i].apply(y);
        for (std::size_t r = 0; r < model.d; ++r) s(r, i) = by[r];
    }
    if (model.has_g()) {
        const Matrix gcols = model.stacked_g(y, t);
        for (std::size_t i = 0; i < model.m; ++i)
            for (std::size_t r = 0; r < model.d; ++r) s(r, i) += gcols(r, i);
    }
    return s;
}

// Directional derivative of g_j at y along v: analytic Jacobian when the
// model supplies one, otherwise a central difference with step
// 1e-6*(1+||y||).
Vec dg_directional(const SemilinearSDE& model, std::size_t j, const Vec& y,
                   double t, const Vec& v) {
    if (!model.Dg.empty() && model.Dg[j]) return model.Dg[j](y, t).apply(v);
    const double vnorm = norm2(v);
    if (vnorm == 0.0) return Vec(model.d, 0.0);
    const double h = 1e-6 * (1.0 + norm2(y));
    Vec yp = y, ym = y;
    axpy(yp, h / vnorm, v);
    axpy(ym, -h / vnorm, v);
    const Vec gp = model.g_column(j, yp, t);
    const Vec gm = model.g_column(j, ym, t);
    Vec out(model.d);
    for (std::size_t r = 0; r < model.d; ++r)
        out[r] = (gp[r] - gm[r]) * vnorm / (2.0 * h);
    return out;
}

// Commutative-noise Milstein correction
//   1/2 sum_{i,j} (Dsigma_j sigma_i)(y) (dW_i dW_j - delta_ij dt).
Vec milstein_correction(const SemilinearSDE& model, const Vec& y, double t,
                        double dt, const Vec& dW) {
    const Matrix sigma = diffusion_columns(model, y, t);
    Vec corr(model.d, 0.0);
    for (std::size_t j = 0; j < model.m; ++j) {
        for (std::size_t i = 0; i < model.m; ++i) {
            const double weight = dW[i] * dW[j] - (i == j ? dt : 0.0);
            if (weight == 0.0) continue;
            Vec sigma_i(model.d);
            for (std::size_t r = 0; r < model.d; ++r) sigma_i[r] = sigma(r, i);
            Vec dsj = model.B[j].apply(sigma_i);
            if (model.has_g()) {
                const Vec dg = dg_directional(model, j, y, t, sigma_i);
                for (std::size_t r = 0; r < model.d; ++r) dsj[r] += dg[r];
            }
            axpy(corr, 0.5 * weight, dsj);
        }
    }
    return corr;
}

Vec em_core(const SemilinearSDE& model, const Vec& y, double t, double dt,
            const Vec& dW, bool tamed_drift) {
    Vec drift = model.full_drift(y, t);
    if (tamed_drift) drift = tame(drift, dt);
    Vec out = y;
    axpy(out, dt, drift);
    const Matrix sigma = diffusion_columns(model, y, t);
    for (std::size_t i = 0; i < model.m; ++i)
        for (std::size_t r = 0; r < model.d; ++r) out[r] += sigma(r, i) * dW[i];
    return out;
}

Vec milstein_core(const SemilinearSDE& model, const Vec& y, double t, double dt,
                  const Vec& dW, bool tamed_drift) {
    Vec out = em_core(model, y, t, dt, dW, tamed_drift);
    const Vec corr = milstein_correction(model, y, t, dt, dW);
    for (std::size_t r = 0; r < model.d; ++r) out[r] += corr[r];
    return out;
}

}  // namespace

Vec step_tamed_em(const SemilinearSDE& model, const Vec& y, double t, double dt,
                  const Vec& dW) {
    return em_core(model, y, t, dt, dW, true);
}

Vec step_tamed_milstein(const SemilinearSDE& model, const Vec& y, double t,
                        double dt, const Vec& dW) {
    return milstein_core(model, y, t, dt, dW, true);
}

Vec step_projected_milstein(const SemilinearSDE& model, const Vec& y, double t,
                            double dt, const Vec& dW, double kappa) {
    // Radial projection onto the ball of radius kappa*dt^(-1/(2c)).
    const double radius =
        kappa * std::pow(dt, -1.0 / (2.0 * model.growth_exponent_c));
    Vec yp = y;
    const double ynorm = norm2(y);
    if (ynorm > radius) yp = scaled(y, radius / ynorm);
    return milstein_core(model, yp, t, dt, dW, false);
}

Vec step_explicit_em(const SemilinearSDE& model, const Vec& y, double t,
                     double dt, const Vec& dW) {
    return em_core(model, y, t, dt, dW, false);
}

std::pair<double, bool> adaptive_step_size(const Vec& y, const AdaptiveConfig& cfg) {
    const double ynorm = norm2(y);
    // ||Y|| = 0 takes the min branch: h = h_max.
    const double candidate = (ynorm == 0.0) ? cfg.h_max : cfg.h_max / ynorm;
    const double h_raw = std::max(cfg.h_min(), std::min(cfg.h_max, candidate));

    // Quantize down to the fine lattice; the 1e-12 relief keeps exact
    // multiples from rounding to the next step count below.
    auto quantize = [&](double h) {
        auto k = static_cast<long>(std::floor(h / cfg.fine_delta * (1.0 + 1e-12)));
        return std::max<long>(1, k);
    };
    const long k_min = quantize(cfg.h_min());
    const long k = std::max(quantize(h_raw), k_min);
    return {static_cast<double>(k) * cfg.fine_delta, k == k_min};
}

namespace {

void check_state(const Vec& y, SchemeId scheme, std::size_t step) {
    if (!all_finite(y)) throw OverflowError(scheme, step);
}

void require_commutative(const SemilinearSDE& model) {
    if (!validate_commutativity(model, 1e-10).pass)
        throw ConfigError("model " + model.name +
                          ": linear parts violate the zero-commutator conditions");
}

}  // namespace

Trajectory integrate_fixed(SchemeId scheme, const SemilinearSDE& model,
                           const WienerLattice& lattice, std::size_t factor,
                           double projected_kappa) {
    model.validate();
    if (is_adaptive(scheme))
        throw ConfigError(std::string(scheme_name(scheme)) +
                          " is adaptive; use integrate_adaptive");
    if (model.m != lattice.m) throw ConfigError("integrate: lattice driver count mismatch");

    const bool flow_based = scheme == SchemeId::ei0 || scheme == SchemeId::tamed_ei0 ||
                            scheme == SchemeId::tamed_ei0_general;
    if ((scheme == SchemeId::ei0 || scheme == SchemeId::tamed_ei0) && model.has_g())
        throw ConfigError(std::string(scheme_name(scheme)) +
                          " handles linear diffusion only; model " + model.name +
                          " has nonlinear g (use tamed_ei0_general)");
    if (flow_based) require_commutative(model);

    const CoarseIncrements inc = coarsen(lattice, factor);
    const double dt = inc.dt;
    GbmFlow flow(model.A, model.B);

    Trajectory traj;
    traj.times.reserve(inc.n_coarse + 1);
    traj.states.reserve(inc.n_coarse + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(model.x0);

    Vec y = model.x0;
    for (std::size_t n = 0; n < inc.n_coarse; ++n) {
        const double t = static_cast<double>(n * factor) * lattice.delta;
        const Vec dW = inc.step_vector(n);
        switch (scheme) {
            case SchemeId::ei0:
                y = step_tamed_ei0(model, flow, y, t, dt, dW, false);
                break;
            case SchemeId::tamed_ei0:
                y = step_tamed_ei0(model, flow, y, t, dt, dW, true);
                break;
            case SchemeId::tamed_ei0_general:
                y = step_tamed_ei0_general(model, flow, y, t, dt, dW, true);
                break;
            case SchemeId::tamed_em:
                y = step_tamed_em(model, y, t, dt, dW);
                break;
            case SchemeId::tamed_milstein:
                y = step_tamed_milstein(model, y, t, dt, dW);
                break;
            case SchemeId::projected_milstein:
                y = step_projected_milstein(model, y, t, dt, dW, projected_kappa);
                break;
            default:
                throw ConfigError("unsupported fixed-step scheme");
        }
        check_state(y, scheme, n);
        if (model.domain_violation && model.domain_violation(y)) ++traj.domain_violations;
        const bool last = (n + 1 == inc.n_coarse);
        traj.times.push_back(last ? lattice.T
                                  : static_cast<double>((n + 1) * factor) * lattice.delta);
        traj.states.push_back(y);
    }
    return traj;
}

Trajectory integrate_adaptive(SchemeId scheme, const SemilinearSDE& model,
                              const WienerLattice& lattice,
                              const AdaptiveConfig& cfg) {
    model.validate();
    if (!is_adaptive(scheme))
        throw ConfigError(std::string(scheme_name(scheme)) +
                          " is not adaptive; use integrate_fixed");
    if (model.m != lattice.m) throw ConfigError("integrate: lattice driver count mismatch");
    if (cfg.fine_delta != lattice.delta)
        throw ConfigError("adaptive: config fine_delta does not match the lattice");
    if (cfg.h_max > lattice.T * (1.0 + 1e-12))
        throw ConfigError("adaptive.h_max exceeds the horizon T");
    if (scheme == SchemeId::adaptive_gbm) {
        if (model.has_g())
            throw ConfigError("adaptive_gbm handles linear diffusion only");
        require_commutative(model);
    }

    GbmFlow flow(model.A, model.B);
    auto quantize = [&](double h) {
        auto k = static_cast<long>(std::floor(h / cfg.fine_delta * (1.0 + 1e-12)));
        return std::max<long>(1, k);
    };
    const std::size_t k_min = static_cast<std::size_t>(quantize(cfg.h_min()));

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(model.x0);

    Vec y = model.x0;
    std::size_t idx = 0;
    std::size_t step = 0;
    while (idx < lattice.n_fine) {
        const double ynorm = norm2(y);
        const double candidate = (ynorm == 0.0) ? cfg.h_max : cfg.h_max / ynorm;
        const double h_raw = std::max(cfg.h_min(), std::min(cfg.h_max, candidate));
        if (h_raw == cfg.h_min()) ++traj.min_step_hits;

        std::size_t k = std::max<std::size_t>(quantize(h_raw), k_min);
        k = std::min(k, lattice.n_fine - idx);  // truncate the final step onto T
        const bool backstop = (k <= k_min);

        const double t = static_cast<double>(idx) * lattice.delta;
        const double dt = static_cast<double>(k) * lattice.delta;
        const Vec dW = lattice.increment_over(idx, idx + k);

        if (scheme == SchemeId::adaptive_gbm) {
            y = step_tamed_ei0(model, flow, y, t, dt, dW, backstop);
        } else {
            y = backstop ? step_tamed_milstein(model, y, t, dt, dW)
                         : milstein_core(model, y, t, dt, dW, false);
        }
        check_state(y, scheme, step);
        if (model.domain_violation && model.domain_violation(y)) ++traj.domain_violations;
        if (backstop) ++traj.backstop_count;

        idx += k;
        ++step;
        traj.times.push_back(idx == lattice.n_fine
                                 ? lattice.T
                                 : static_cast<double>(idx) * lattice.delta);
        traj.states.push_back(y);
    }
    return traj;
}

}  // namespace sdegbm
