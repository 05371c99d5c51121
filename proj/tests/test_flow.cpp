#include <doctest.h>

#include <cmath>

#include "sdegbm/errors.hpp"
#include "sdegbm/flow.hpp"
#include "sdegbm/rng.hpp"

using namespace sdegbm;

namespace {

Matrix scalar(double v) { return Matrix::diagonal({v}); }

// Householder reflector from a fixed vector: a cheap exact orthogonal Q.
Matrix orthogonal3() {
    Vec v = {1.0, -2.0, 0.5};
    const double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    Matrix q = Matrix::identity(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) q(i, j) -= 2.0 * v[i] * v[j] / n2;
    return q;
}

}  // namespace

TEST_CASE("scalar flow, noise free") {
    const FlowMatrix phi = flow_matrix(scalar(1.0), {scalar(0.0)}, 0.5, {0.0});
    CHECK(phi.diagonal);
    CHECK(phi.diag[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
}

TEST_CASE("scalar flow with noise") {
    // exp((0.5 - 0.5)*0.25 + 0.2) = exp(0.2)
    const FlowMatrix phi = flow_matrix(scalar(0.5), {scalar(1.0)}, 0.25, {0.2});
    CHECK(phi.diag[0] == doctest::Approx(std::exp(0.2)).epsilon(1e-14));
}

TEST_CASE("diagonal flow matches the per-component scalar formula") {
    const FlowMatrix phi = flow_matrix(Matrix::diagonal({0.0, 1.0}),
                                       {Matrix::diagonal({1.0, 2.0})}, 0.1, {0.3});
    CHECK(phi.diag[0] == doctest::Approx(std::exp(-0.05 + 0.3)).epsilon(1e-14));
    CHECK(phi.diag[1] == doctest::Approx(std::exp((1.0 - 2.0) * 0.1 + 0.6)).epsilon(1e-14));
}

TEST_CASE("zero step gives identity") {
    const FlowMatrix phi = flow_matrix(Matrix::diagonal({2.0, -3.0}),
                                       {Matrix::diagonal({1.0, 1.0})}, 0.0, {0.0});
    CHECK(phi.diag[0] == 1.0);
    CHECK(phi.diag[1] == 1.0);
    const FlowMatrix inv = inverse_flow_matrix(Matrix::diagonal({2.0, -3.0}),
                                               {Matrix::diagonal({1.0, 1.0})}, 0.0, {0.0});
    CHECK(inv.diag[0] == 1.0);
}

TEST_CASE("inverse flow is the reciprocal exponential") {
    const FlowMatrix inv = inverse_flow_matrix(scalar(0.5), {scalar(1.0)}, 0.25, {0.2});
    CHECK(inv.diag[0] == doctest::Approx(std::exp(-0.2)).epsilon(1e-14));
}

TEST_CASE("inverse times forward is identity on random diagonal inputs") {
    RandomStream rng(501, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t d = 1 + trial % 4;
        Vec a(d), b(d);
        for (auto& v : a) v = rng.next_normal();
        for (auto& v : b) v = rng.next_normal();
        const double dt = 0.3 * rng.next_uniform();
        const Vec dw = {std::sqrt(dt) * rng.next_normal()};
        const GbmFlow flow(Matrix::diagonal(a), {Matrix::diagonal(b)});
        const FlowMatrix fwd = flow.matrix(dt, dw);
        const FlowMatrix inv = flow.inverse_matrix(dt, dw);
        for (std::size_t k = 0; k < d; ++k) {
            CHECK(fwd.diag[k] > 0.0);  // scalar flow stays positive
            CHECK(fwd.diag[k] * inv.diag[k] == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("semigroup identity on random diagonal splits") {
    RandomStream rng(502, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + trial % 3;
        const std::size_t m = 1 + trial % 2;
        Vec a(d);
        for (auto& v : a) v = 2.0 * rng.next_normal();
        std::vector<Matrix> b;
        for (std::size_t i = 0; i < m; ++i) {
            Vec bi(d);
            for (auto& v : bi) v = rng.next_normal();
            b.push_back(Matrix::diagonal(bi));
        }
        const GbmFlow flow(Matrix::diagonal(a), b);
        const double dt1 = 0.25 * rng.next_uniform();
        const double dt2 = 0.25 * rng.next_uniform();
        Vec dw1(m), dw2(m), dw(m);
        for (std::size_t i = 0; i < m; ++i) {
            dw1[i] = std::sqrt(dt1) * rng.next_normal();
            dw2[i] = std::sqrt(dt2) * rng.next_normal();
            dw[i] = dw1[i] + dw2[i];
        }
        const FlowMatrix lhs = flow.matrix(dt1, dw1).times(flow.matrix(dt2, dw2));
        const FlowMatrix rhs = flow.matrix(dt1 + dt2, dw);
        CHECK((lhs.as_matrix() - rhs.as_matrix()).frobenius_norm() < 1e-10);
    }
}

TEST_CASE("dense commuting pair agrees with the rotated diagonal oracle") {
    const Matrix q = orthogonal3();
    const Matrix d1 = Matrix::diagonal({0.5, -1.0, 0.2});
    const Matrix d2 = Matrix::diagonal({0.8, 0.1, -0.4});
    // transpose(q) is q itself (symmetric Householder reflector)
    const Matrix a = q * d1 * q;
    const Matrix b = q * d2 * q;

    const double dt = 0.3;
    const Vec dw = {0.25};
    const FlowMatrix dense = flow_matrix(a, {b}, dt, dw);
    CHECK_FALSE(dense.diagonal);

    Vec expo(3);
    for (std::size_t k = 0; k < 3; ++k)
        expo[k] = std::exp((d1(k, k) - 0.5 * d2(k, k) * d2(k, k)) * dt + d2(k, k) * dw[0]);
    const Matrix oracle = q * Matrix::diagonal(expo) * q;
    CHECK((dense.as_matrix() - oracle).frobenius_norm() < 1e-12);

    const FlowMatrix inv = inverse_flow_matrix(a, {b}, dt, dw);
    const Matrix prod = dense.as_matrix() * inv.as_matrix();
    CHECK((prod - Matrix::identity(3)).frobenius_norm() < 1e-12);
}

TEST_CASE("flow rejects bad input") {
    CHECK_THROWS_AS(flow_matrix(scalar(1.0), {scalar(1.0)}, 0.1, {0.1, 0.2}),
                    ConfigError);
    CHECK_THROWS_AS(flow_matrix(scalar(1.0), {scalar(1.0)}, -0.1, {0.1}),
                    NumericError);
    CHECK_THROWS_AS(
        flow_matrix(scalar(1.0), {scalar(1.0)}, 0.1,
                    {std::numeric_limits<double>::quiet_NaN()}),
        NumericError);
}
