#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdegbm/errors.hpp"
#include "sdegbm/flow.hpp"
#include "sdegbm/model.hpp"
#include "sdegbm/wiener.hpp"

namespace sdegbm {

enum class SchemeId {
    ei0,
    tamed_ei0,
    tamed_ei0_general,
    adaptive_gbm,
    tamed_em,
    tamed_milstein,
    projected_milstein,
    adaptive_milstein,
};

const char* scheme_name(SchemeId id);
SchemeId parse_scheme(const std::string& s);
bool is_adaptive(SchemeId id);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    long backstop_count = 0;      // adaptive: steps taken with the tamed backstop
    long min_step_hits = 0;       // adaptive: times the raw step rule hit h_min
    long domain_violations = 0;

    const Vec& final_state() const { return states.back(); }
};

// A state blew up (non-finite) mid-integration; the harness counts these
// paths instead of letting them poison the error statistics.
class OverflowError : public NumericError {
public:
    OverflowError(SchemeId scheme, std::size_t step);
    SchemeId scheme;
    std::size_t step;
};

struct AdaptiveConfig {
    // Validates h_max <= T is left to the integrator (T is not known here);
    // construction enforces h_min = h_max/rho >= fine_delta.
    AdaptiveConfig(double h_max, double rho, double fine_delta);
    double h_max;
    double rho;
    double fine_delta;
    double h_min() const { return h_max / rho; }
};

// Drift taming F/(1 + dt*||F||): bounded by min(||F||, 1/dt), direction kept.
Vec tame(const Vec& f_val, double dt);

// One-step rules. All are pure; `flow` must be built from the same linear
// parts as `model` (GbmFlow(model.A, model.B)).
Vec step_tamed_ei0(const SemilinearSDE& model, const GbmFlow& flow, const Vec& y,
                   double t, double dt, const Vec& dW, bool tamed = true);
Vec step_tamed_ei0_general(const SemilinearSDE& model, const GbmFlow& flow,
                           const Vec& y, double t, double dt, const Vec& dW,
                           bool tamed = true);
Vec step_tamed_em(const SemilinearSDE& model, const Vec& y, double t, double dt,
                  const Vec& dW);
Vec step_tamed_milstein(const SemilinearSDE& model, const Vec& y, double t,
                        double dt, const Vec& dW);
Vec step_projected_milstein(const SemilinearSDE& model, const Vec& y, double t,
                            double dt, const Vec& dW, double kappa);
// Plain explicit Euler-Maruyama without flow or taming; the divergence
// stress baseline, intentionally not part of SchemeId.
Vec step_explicit_em(const SemilinearSDE& model, const Vec& y, double t,
                     double dt, const Vec& dW);

// Step rule h = max(h_min, min(h_max, h_max/||Y||)), quantized down to the
// fine lattice so adaptive increments stay exact block sums.
std::pair<double, bool> adaptive_step_size(const Vec& y, const AdaptiveConfig& cfg);

Trajectory integrate_fixed(SchemeId scheme, const SemilinearSDE& model,
                           const WienerLattice& lattice, std::size_t factor,
                           double projected_kappa = 1.0);

Trajectory integrate_adaptive(SchemeId scheme, const SemilinearSDE& model,
                              const WienerLattice& lattice,
                              const AdaptiveConfig& cfg);

}  // namespace sdegbm
