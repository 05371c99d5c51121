#include <doctest.h>

#include <cmath>

#include "sdegbm/errors.hpp"
#include "sdegbm/integrators.hpp"
#include "sdegbm/rng.hpp"

using namespace sdegbm;

namespace {

SemilinearSDE gl_model(double sigma = 2.0) {
    return builtin_model(ModelName::ginzburg_landau, {{"sigma", sigma}});
}

WienerLattice zero_lattice(std::size_t m, std::size_t n, double T) {
    WienerLattice lat;
    lat.m = m;
    lat.n_fine = n;
    lat.T = T;
    lat.delta = T / static_cast<double>(n);
    lat.increments.assign(m * n, 0.0);
    return lat;
}

SemilinearSDE custom_scalar(double a, double b) {
    SemilinearSDE m;
    m.d = 1;
    m.m = 1;
    m.A = Matrix::diagonal({a});
    m.B = {Matrix::diagonal({b})};
    m.x0 = {1.0};
    m.T = 1.0;
    m.name = "custom";
    return m;
}

}  // namespace

TEST_CASE("taming formula") {
    const Vec out = tame({3.0, 4.0}, 0.1);  // ||F|| = 5, denominator 1.5
    CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(norm2(out) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));

    const Vec zero = tame({0.0, 0.0, 0.0}, 0.5);
    CHECK(norm2(zero) == 0.0);

    const Vec big = tame({1e6, 0.0}, 0.01);
    CHECK(norm2(big) <= 100.0);  // 1/dt cap
    CHECK(norm2(big) == doctest::Approx(1e6 / (1.0 + 1e4)).epsilon(1e-13));

    CHECK_THROWS_AS(tame({1.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(tame({std::numeric_limits<double>::infinity()}, 0.1), NumericError);
}

TEST_CASE("taming bound and direction over random inputs") {
    RandomStream rng(601, 0);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t d = 1 + trial % 5;
        const double scale = std::pow(10.0, 8.0 * rng.next_uniform() - 2.0);
        Vec f(d);
        for (auto& v : f) v = scale * rng.next_normal();
        const double dt = std::pow(10.0, -5.0 * rng.next_uniform());
        const Vec tamed = tame(f, dt);
        const double tn = norm2(tamed);
        CHECK(tn <= std::min(norm2(f), 1.0 / dt));
        // parallel: tamed is an exact scalar multiple of f
        for (std::size_t i = 0; i < d; ++i)
            CHECK(tamed[i] * norm2(f) == doctest::Approx(f[i] * tn).epsilon(1e-10));
    }
}

TEST_CASE("tamed EI0 step on the cubic test equation") {
    const SemilinearSDE gl = gl_model();
    const GbmFlow flow(gl.A, gl.B);
    const double dt = 0.25, dw = 0.1;

    // independent scalar evaluation of the flow and taming formulas
    const double phi = std::exp((0.0 - 1.0) * dt + std::sqrt(2.0) * dw);
    const double f_tamed = -1.0 / (1.0 + dt * 1.0);
    const double expected = phi * (1.0 + f_tamed * dt);
    CHECK(expected == doctest::Approx(0.7176866720538064).epsilon(1e-12));

    const Vec y = step_tamed_ei0(gl, flow, {1.0}, 0.0, dt, {dw}, true);
    CHECK(y[0] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("EI0 with zero nonlinearity is the pure flow") {
    SemilinearSDE gl = gl_model();
    gl.F = nullptr;
    gl.DF = nullptr;
    const GbmFlow flow(gl.A, gl.B);
    const Vec y = step_tamed_ei0(gl, flow, {0.7}, 0.0, 0.25, {0.3}, true);
    CHECK(y[0] == flow.matrix(0.25, {0.3}).diag[0] * 0.7);
}

TEST_CASE("taming perturbs the step by at most dt^2 ||F||^2") {
    SemilinearSDE gl = gl_model();
    const GbmFlow flow(gl.A, gl.B);
    const double dt = 0.125;
    const Vec y = {0.1};  // ||F|| = 1e-3
    const Vec tamed = step_tamed_ei0(gl, flow, y, 0.0, dt, {-0.1}, true);
    const Vec untamed = step_tamed_ei0(gl, flow, y, 0.0, dt, {-0.1}, false);
    const double fnorm = 1e-3;
    CHECK(std::abs(tamed[0] - untamed[0]) <= dt * dt * fnorm * fnorm);
}

TEST_CASE("general scheme reduces to tamed EI0 when g is zero") {
    SemilinearSDE gl = gl_model();
    gl.g = {[](const Vec& x, double) { return Vec(x.size(), 0.0); }};
    const GbmFlow flow(gl.A, gl.B);
    const Vec general = step_tamed_ei0_general(gl, flow, {0.8}, 0.0, 0.2, {0.15});
    SemilinearSDE plain = gl_model();
    const Vec base = step_tamed_ei0(plain, flow, {0.8}, 0.0, 0.2, {0.15}, true);
    CHECK(general[0] == doctest::Approx(base[0]).epsilon(1e-15));
}

TEST_CASE("general scheme with no linear parts is tamed Euler-Maruyama") {
    SemilinearSDE m = custom_scalar(0.0, 0.0);
    m.F = [](const Vec& x, double) -> Vec { return {-x[0] * x[0] * x[0]}; };
    m.g = {[](const Vec& x, double) -> Vec { return {0.5 + 0.1 * x[0]}; }};
    const GbmFlow flow(m.A, m.B);
    const Vec general = step_tamed_ei0_general(m, flow, {1.2}, 0.0, 0.25, {0.3});
    const Vec em = step_tamed_em(m, {1.2}, 0.0, 0.25, {0.3});
    CHECK(general[0] == doctest::Approx(em[0]).epsilon(1e-14));
}

TEST_CASE("general scheme additive-noise identity") {
    SemilinearSDE m = custom_scalar(0.0, 0.0);
    m.g = {[](const Vec&, double) -> Vec { return {1.0}; }};
    const GbmFlow flow(m.A, m.B);
    const Vec y = step_tamed_ei0_general(m, flow, {0.0}, 0.0, 0.1, {0.3});
    CHECK(y[0] == 0.3);
}

TEST_CASE("general scheme requires g") {
    SemilinearSDE gl = gl_model();
    const GbmFlow flow(gl.A, gl.B);
    CHECK_THROWS_AS(step_tamed_ei0_general(gl, flow, {1.0}, 0.0, 0.1, {0.0}),
                    ConfigError);
}

TEST_CASE("tamed EM step on the cubic test equation") {
    const SemilinearSDE gl = gl_model();
    const Vec y = step_tamed_em(gl, {1.0}, 0.0, 0.25, {0.1});
    // drift A*1 + F(1) = -1, tamed to -0.8; diffusion sqrt(2)*0.1
    const double expected = 1.0 - 0.8 * 0.25 + std::sqrt(2.0) * 0.1;
    CHECK(expected == doctest::Approx(0.9414213562373096).epsilon(1e-14));
    CHECK(y[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("tamed EM fixed point at drift equilibrium") {
    SemilinearSDE m = custom_scalar(1.0, 0.0);
    m.F = [](const Vec& x, double) -> Vec { return {-x[0]}; };  // A x + F = 0
    const Vec y = step_tamed_em(m, {0.37}, 0.0, 0.5, {0.0});
    CHECK(y[0] == 0.37);
}

TEST_CASE("tamed EM drift increment never exceeds one") {
    RandomStream rng(602, 0);
    SemilinearSDE gl = gl_model();
    for (int trial = 0; trial < 200; ++trial) {
        const double y = 1e3 * rng.next_normal();
        const double dt = std::pow(10.0, -4.0 * rng.next_uniform());
        const Vec out = step_tamed_em(gl, {y}, 0.0, dt, {0.0});
        CHECK(std::abs(out[0] - y) <= 1.0 + 1e-12);
    }
}

TEST_CASE("tamed Milstein adds the commutative correction") {
    const SemilinearSDE gl = gl_model();
    const Vec y = step_tamed_milstein(gl, {1.0}, 0.0, 0.25, {0.1});
    // Dsigma.sigma = b^2 x = 2, correction 0.5*2*(0.01 - 0.25)
    const double expected = 0.9414213562373096 + 0.5 * 2.0 * (0.01 - 0.25);
    CHECK(expected == doctest::Approx(0.7014213562373096).epsilon(1e-13));
    CHECK(y[0] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("Milstein correction vanishes for additive noise") {
    SemilinearSDE m = custom_scalar(0.3, 0.0);
    m.F = [](const Vec& x, double) -> Vec { return {-x[0] * x[0] * x[0]}; };
    m.g = {[](const Vec&, double) -> Vec { return {0.7}; }};
    const Vec mil = step_tamed_milstein(m, {0.9}, 0.0, 0.2, {0.33});
    const Vec em = step_tamed_em(m, {0.9}, 0.0, 0.2, {0.33});
    CHECK(mil[0] == doctest::Approx(em[0]).epsilon(1e-12));
}

TEST_CASE("Milstein diagonal correction vanishes when dW^2 = dt") {
    const SemilinearSDE gl = gl_model();
    const double dt = 0.16;
    const double dw = std::sqrt(dt);
    const Vec mil = step_tamed_milstein(gl, {1.1}, 0.0, dt, {dw});
    const Vec em = step_tamed_em(gl, {1.1}, 0.0, dt, {dw});
    CHECK(mil[0] == doctest::Approx(em[0]).epsilon(1e-13));
}

TEST_CASE("projected Milstein radial projection") {
    // zero coefficients: the step returns the projected state itself
    SemilinearSDE m = custom_scalar(0.0, 0.0);
    m.growth_exponent_c = 1.0;

    // kappa=2, dt=1 -> radius 2; ||Y|| = 10 shrinks to 2, direction kept
    Vec y = step_projected_milstein(m, {6.0}, 0.0, 1.0, {0.0}, 2.0);
    CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-14));

    // kappa=1, c=1, dt=0.01 -> radius 10
    y = step_projected_milstein(m, {10.5}, 0.0, 0.01, {0.0}, 1.0);
    CHECK(y[0] == doctest::Approx(10.0).epsilon(1e-12));
    y = step_projected_milstein(m, {9.9}, 0.0, 0.01, {0.0}, 1.0);
    CHECK(y[0] == 9.9);  // projection inactive
}

TEST_CASE("projected Milstein with inactive projection is plain Milstein") {
    const SemilinearSDE gl = gl_model();
    const Vec y = step_projected_milstein(gl, {1.0}, 0.0, 0.25, {0.1}, 1e9);
    // untamed drift -1*0.25, diffusion sqrt(2)*0.1, correction 0.5*2*(0.01-0.25)
    const double expected = 1.0 - 0.25 + std::sqrt(2.0) * 0.1 + 0.5 * 2.0 * (0.01 - 0.25);
    CHECK(y[0] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("adaptive step rule") {
    const AdaptiveConfig cfg(0.1, 10.0, 0.01);
    auto [h1, bs1] = adaptive_step_size({0.5}, cfg);
    CHECK(h1 == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_FALSE(bs1);

    auto [h2, bs2] = adaptive_step_size({4.0}, cfg);  // 0.025 floors to 0.02
    CHECK(h2 == doctest::Approx(0.02).epsilon(1e-14));
    CHECK_FALSE(bs2);

    auto [h3, bs3] = adaptive_step_size({100.0}, cfg);
    CHECK(h3 == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(bs3);

    // ||Y|| = 0 takes the min branch
    auto [h4, bs4] = adaptive_step_size({0.0}, cfg);
    CHECK(h4 == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_FALSE(bs4);

    CHECK_THROWS_AS(AdaptiveConfig(0.1, 100.0, 0.01), ConfigError);  // h_min < delta
}

TEST_CASE("fixed integration is exact for pure GBM") {
    SemilinearSDE gl = gl_model();
    gl.F = nullptr;
    gl.DF = nullptr;
    const WienerLattice lat = sample_lattice(31, 0, 1, 256, 1.0);
    const double corr = gl.A(0, 0) - 0.5 * gl.B[0](0, 0) * gl.B[0](0, 0);

    for (std::size_t factor : {1u, 4u, 16u, 256u}) {
        const Trajectory traj = integrate_fixed(SchemeId::tamed_ei0, gl, lat, factor);
        double w = 0.0;
        for (std::size_t n = 1; n < traj.times.size(); ++n) {
            for (std::size_t k = (n - 1) * factor; k < n * factor; ++k)
                w += lat.at(0, k);
            const double t = static_cast<double>(n * factor) * lat.delta;
            const double exact = gl.x0[0] * std::exp(corr * t + gl.B[0](0, 0) * w);
            CHECK(traj.states[n][0] == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("single-step integration and determinism") {
    const SemilinearSDE gl = gl_model();
    const WienerLattice lat = sample_lattice(32, 0, 1, 64, 1.0);
    const Trajectory one = integrate_fixed(SchemeId::tamed_ei0, gl, lat, 64);
    CHECK(one.times.size() == 2);
    CHECK(one.times[0] == 0.0);
    CHECK(one.times[1] == 1.0);

    const Trajectory a = integrate_fixed(SchemeId::tamed_ei0, gl, lat, 8);
    const Trajectory b = integrate_fixed(SchemeId::tamed_ei0, gl, lat, 8);
    CHECK(a.states.size() == b.states.size());
    for (std::size_t n = 0; n < a.states.size(); ++n)
        CHECK(a.states[n][0] == b.states[n][0]);
}

TEST_CASE("fixed integrator rejects misuse") {
    const SemilinearSDE gl = gl_model();
    const WienerLattice lat = sample_lattice(33, 0, 1, 16, 1.0);
    CHECK_THROWS_AS(integrate_fixed(SchemeId::adaptive_gbm, gl, lat, 4), ConfigError);
    CHECK_THROWS_AS(integrate_fixed(SchemeId::tamed_ei0, gl, lat, 3), ConfigError);
    CHECK_THROWS_AS(integrate_fixed(SchemeId::tamed_ei0_general, gl, lat, 4),
                    ConfigError);
}

TEST_CASE("overflow carries scheme and step") {
    // untamed EI0 on a positive-feedback cubic blows up fast
    SemilinearSDE m = custom_scalar(2.0, 0.0);
    m.F = [](const Vec& x, double) -> Vec { return {x[0] * x[0] * x[0]}; };
    m.x0 = {3.0};
    const WienerLattice lat = zero_lattice(1, 16, 8.0);
    try {
        integrate_fixed(SchemeId::ei0, m, lat, 1);
        FAIL("expected OverflowError");
    } catch (const OverflowError& e) {
        CHECK(e.scheme == SchemeId::ei0);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
        CHECK(std::string(e.what()).find("ei0") != std::string::npos);
    }
}

TEST_CASE("rho = 1 collapses the adaptive scheme onto fixed tamed EI0") {
    const SemilinearSDE gl = gl_model();
    const WienerLattice lat = sample_lattice(34, 2, 1, 512, 1.0);
    const std::size_t factor = 32;
    const AdaptiveConfig cfg(static_cast<double>(factor) * lat.delta, 1.0, lat.delta);
    const Trajectory adaptive = integrate_adaptive(SchemeId::adaptive_gbm, gl, lat, cfg);
    const Trajectory fixed = integrate_fixed(SchemeId::tamed_ei0, gl, lat, factor);
    REQUIRE(adaptive.states.size() == fixed.states.size());
    for (std::size_t n = 0; n < fixed.states.size(); ++n)
        CHECK(std::abs(adaptive.states[n][0] - fixed.states[n][0]) <= 1e-14);
    CHECK(adaptive.backstop_count ==
          static_cast<long>(adaptive.states.size() - 1));
}

TEST_CASE("small solutions keep h = h_max and match fixed EI0 exactly") {
    // contractive drift, no noise: ||Y|| stays below 1 so the rule always
    // takes the h_max branch and the adaptive path is plain (untamed) EI0
    SemilinearSDE m = custom_scalar(-1.0, 0.0);
    m.x0 = {0.5};
    const WienerLattice lat = zero_lattice(1, 128, 1.0);
    const std::size_t factor = 16;
    const AdaptiveConfig cfg(static_cast<double>(factor) * lat.delta, 4.0, lat.delta);
    const Trajectory adaptive = integrate_adaptive(SchemeId::adaptive_gbm, m, lat, cfg);
    const Trajectory fixed = integrate_fixed(SchemeId::ei0, m, lat, factor);
    REQUIRE(adaptive.states.size() == fixed.states.size());
    for (std::size_t n = 0; n < fixed.states.size(); ++n)
        CHECK(adaptive.states[n][0] == fixed.states[n][0]);
    CHECK(adaptive.backstop_count == 0);
}

TEST_CASE("adaptive bookkeeping on the cubic equation") {
    const SemilinearSDE gl = gl_model();
    const WienerLattice lat = sample_lattice(35, 0, 1, 1024, 1.0);
    const AdaptiveConfig cfg(1.0 / 16.0, 8.0, lat.delta);
    const Trajectory traj = integrate_adaptive(SchemeId::adaptive_gbm, gl, lat, cfg);
    CHECK(traj.backstop_count >= 0);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == 1.0);
    for (std::size_t n = 1; n < traj.times.size(); ++n)
        CHECK(traj.times[n] > traj.times[n - 1]);

    const Trajectory again = integrate_adaptive(SchemeId::adaptive_gbm, gl, lat, cfg);
    CHECK(again.states.size() == traj.states.size());
    for (std::size_t n = 0; n < traj.states.size(); ++n)
        CHECK(again.states[n][0] == traj.states[n][0]);
}

TEST_CASE("adaptive Milstein runs and lands on T") {
    const SemilinearSDE lv =
        builtin_model(ModelName::lotka_volterra, default_params(ModelName::lotka_volterra));
    const WienerLattice lat = sample_lattice(36, 1, 2, 512, 1.0);
    const AdaptiveConfig cfg(1.0 / 8.0, 16.0, lat.delta);
    const Trajectory traj = integrate_adaptive(SchemeId::adaptive_milstein, lv, lat, cfg);
    CHECK(traj.times.back() == 1.0);
    CHECK(all_finite(traj.final_state()));
}

TEST_CASE("scheme names round trip") {
    for (SchemeId id : {SchemeId::ei0, SchemeId::tamed_ei0, SchemeId::tamed_ei0_general,
                        SchemeId::adaptive_gbm, SchemeId::tamed_em,
                        SchemeId::tamed_milstein, SchemeId::projected_milstein,
                        SchemeId::adaptive_milstein})
        CHECK(parse_scheme(scheme_name(id)) == id);
    CHECK_THROWS_AS(parse_scheme("runge_kutta"), ConfigError);
}
