#pragma once

#include <cstddef>
#include <memory>

#include "sdegbm/model.hpp"

namespace sdegbm {

// Reaction-diffusion SPDE on (0,1) with zero Dirichlet data,
//   du = [eps u_xx + u - gamma u^3] dt + [beta u + alpha (1-u)/(1+u^2)] dW,
// reduced to d sine modes driven by Q-Wiener noise with nu_j = 1/j^2.
struct SpdeConfig {
    std::size_t d = 32;        // Fourier modes
    double epsilon = 1.0;
    double gamma = 1.0;
    double alpha = 0.0;
    double beta = 1.0;
    std::size_t grid_size = 0;  // physical nodes; 0 means 2d+1
    double T = 1.0;

    std::size_t resolved_grid() const { return grid_size == 0 ? 2 * d + 1 : grid_size; }
    void validate() const;
};

// Direct transforms between sine coefficients and interior grid values for
// the orthonormal basis sqrt(2) sin(k pi x). The discrete quadrature makes
// to_coeffs an exact left inverse of to_grid on the d-mode subspace.
class SineTransform {
public:
    SineTransform(std::size_t modes, std::size_t grid);

    std::size_t modes() const { return modes_; }
    std::size_t grid() const { return grid_; }
    double node(std::size_t i) const;  // x_i = (i+1)/(grid+1)

    std::vector<double> to_grid(const Vec& coeffs) const;
    Vec to_coeffs(const std::vector<double>& grid_values) const;

    // Tabulated basis value sqrt(2) sin((k+1) pi x_i).
    double basis(std::size_t grid_i, std::size_t mode_k) const {
        return forward_(grid_i, mode_k);
    }

    // Field value sum_k coeffs[k] * sqrt(2) sin((k+1) pi x) at arbitrary x.
    double evaluate(const Vec& coeffs, double x) const;

private:
    std::size_t modes_, grid_;
    Matrix forward_;  // grid x modes
    Matrix inverse_;  // modes x grid
};

SemilinearSDE build_spde_model(const SpdeConfig& cfg);

}  // namespace sdegbm
