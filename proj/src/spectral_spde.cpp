#include "sdegbm/spectral_spde.hpp"

#include <cmath>

#include "sdegbm/errors.hpp"

namespace sdegbm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SpdeConfig::validate() const {
    if (d < 1) throw ConfigError("spde.d must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("model.epsilon must be positive");
    if (resolved_grid() < 2 * d) throw ConfigError("spde.grid_size must be >= 2*d");
    if (!(T > 0.0)) throw ConfigError("run.T must be positive");
}

SineTransform::SineTransform(std::size_t modes, std::size_t grid)
    : modes_(modes), grid_(grid), forward_(grid, modes), inverse_(modes, grid) {
    if (modes < 1 || grid < modes)
        throw ConfigError("sine transform: need grid >= modes >= 1");
    const double sqrt2 = std::sqrt(2.0);
    const double quad = sqrt2 / static_cast<double>(grid_ + 1);
    for (std::size_t i = 0; i < grid_; ++i) {
        const double x = node(i);
        for (std::size_t k = 0; k < modes_; ++k) {
            const double s = std::sin(static_cast<double>(k + 1) * kPi * x);
            forward_(i, k) = sqrt2 * s;
            inverse_(k, i) = quad * s;
        }
    }
}

double SineTransform::node(std::size_t i) const {
    return static_cast<double>(i + 1) / static_cast<double>(grid_ + 1);
}

std::vector<double> SineTransform::to_grid(const Vec& coeffs) const {
    if (coeffs.size() != modes_) throw ConfigError("sine transform: coefficient size mismatch");
    return forward_.apply(coeffs);
}

Vec SineTransform::to_coeffs(const std::vector<double>& grid_values) const {
    if (grid_values.size() != grid_) throw ConfigError("sine transform: grid size mismatch");
    return inverse_.apply(grid_values);
}

double SineTransform::evaluate(const Vec& coeffs, double x) const {
    double u = 0.0;
    for (std::size_t k = 0; k < modes_; ++k)
        u += coeffs[k] * std::sqrt(2.0) * std::sin(static_cast<double>(k + 1) * kPi * x);
    return u;
}

SemilinearSDE build_spde_model(const SpdeConfig& cfg) {
    cfg.validate();
    const std::size_t d = cfg.d;
    auto transform = std::make_shared<SineTransform>(d, cfg.resolved_grid());

    SemilinearSDE sde;
    sde.name = "spde";
    sde.d = d;
    sde.m = d;
    sde.T = cfg.T;
    sde.growth_exponent_c = 2.0;

    // Laplacian eigenvalues plus the linear reaction term u.
    Vec a_diag(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double kk = static_cast<double>(k + 1);
        a_diag[k] = -cfg.epsilon * kPi * kPi * kk * kk + 1.0;
    }
    sde.A = Matrix::diagonal(a_diag);

    // Diagonal reading of the multiplicative beta*u noise: mode j is driven
    // by beta * nu_j^{1/2} * X_j through its own Brownian motion.
    sde.B.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        Matrix bj(d, d);
        bj(j, j) = cfg.beta / static_cast<double>(j + 1);
        sde.B.push_back(std::move(bj));
    }

    const double gamma = cfg.gamma;
    sde.F = [transform, gamma](const Vec& x, double) -> Vec {
        std::vector<double> u = transform->to_grid(x);
        for (double& v : u) v = v * v * v;
        Vec f = transform->to_coeffs(u);
        for (double& v : f) v *= -gamma;
        return f;
    };

    if (cfg.alpha != 0.0) {
        const double alpha = cfg.alpha;
        // All g_j columns share one grid evaluation of (1-u)/(1+u^2); column
        // j is the projection of that field times the j-th eigenfunction,
        // scaled by alpha * nu_j^{1/2}.
        auto stacked = [transform, alpha, d](const Vec& x, double) -> Matrix {
            const std::vector<double> u = transform->to_grid(x);
            std::vector<double> phi(u.size());
            for (std::size_t i = 0; i < u.size(); ++i)
                phi[i] = (1.0 - u[i]) / (1.0 + u[i] * u[i]);
            Matrix cols(d, d);
            std::vector<double> work(u.size());
            for (std::size_t j = 0; j < d; ++j) {
                const double scale = alpha / static_cast<double>(j + 1);
                for (std::size_t i = 0; i < u.size(); ++i)
                    work[i] = phi[i] * transform->basis(i, j);
                const Vec col = transform->to_coeffs(work);
                for (std::size_t r = 0; r < d; ++r) cols(r, j) = scale * col[r];
            }
            return cols;
        };
        sde.g_stacked = stacked;
        sde.g.reserve(d);
        for (std::size_t j = 0; j < d; ++j) {
            sde.g.push_back([stacked, j, d](const Vec& x, double t) -> Vec {
                const Matrix cols = stacked(x, t);
                Vec out(d);
                for (std::size_t r = 0; r < d; ++r) out[r] = cols(r, j);
                return out;
            });
        }
    }

    // u(x,0) = sin(pi x) = (1/sqrt 2) * g_1.
    sde.x0.assign(d, 0.0);
    sde.x0[0] = 1.0 / std::sqrt(2.0);

    sde.validate();
    return sde;
}

}  // namespace sdegbm
