#include "sdegbm/flow.hpp"

#include <cmath>

#include "sdegbm/errors.hpp"

namespace sdegbm {

Vec FlowMatrix::apply(const Vec& v) const {
    if (diagonal) {
        Vec out(v);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= diag[i];
        return out;
    }
    return dense.apply(v);
}

Matrix FlowMatrix::as_matrix() const {
    return diagonal ? Matrix::diagonal(diag) : dense;
}

FlowMatrix FlowMatrix::times(const FlowMatrix& o) const {
    FlowMatrix out;
    out.dt = dt + o.dt;
    out.dW = dW;
    for (std::size_t i = 0; i < dW.size(); ++i) out.dW[i] += o.dW[i];
    if (diagonal && o.diagonal) {
        out.diagonal = true;
        out.diag = diag;
        for (std::size_t i = 0; i < diag.size(); ++i) out.diag[i] *= o.diag[i];
    } else {
        out.diagonal = false;
        out.dense = as_matrix() * o.as_matrix();
    }
    return out;
}

GbmFlow::GbmFlow(const Matrix& a, const std::vector<Matrix>& b) {
    if (!a.is_square()) throw ConfigError("flow: A must be square");
    d_ = a.rows();
    m_ = b.size();
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i].rows() != d_ || b[i].cols() != d_)
            throw ConfigError("flow: B[" + std::to_string(i) + "] has wrong shape");
    if (!a.all_finite()) throw NumericError("flow: A has non-finite entries");
    for (const auto& bi : b)
        if (!bi.all_finite()) throw NumericError("flow: B has non-finite entries");

    diagonal_ = a.is_diagonal();
    for (const auto& bi : b) diagonal_ = diagonal_ && bi.is_diagonal();

    if (diagonal_) {
        drift_corr_diag_ = a.diagonal_vector();
        b_diag_.reserve(m_);
        for (const auto& bi : b) {
            Vec diag = bi.diagonal_vector();
            for (std::size_t k = 0; k < d_; ++k)
                drift_corr_diag_[k] -= 0.5 * diag[k] * diag[k];
            b_diag_.push_back(std::move(diag));
        }
    } else {
        drift_corr_dense_ = a;
        for (const auto& bi : b) drift_corr_dense_ -= 0.5 * (bi * bi);
        b_dense_ = b;
    }
}

FlowMatrix GbmFlow::build(double dt, const Vec& dW, double sign) const {
    if (dW.size() != m_) throw ConfigError("flow: dW has wrong dimension");
    if (!(dt >= 0.0) || !std::isfinite(dt) || !all_finite(dW))
        throw NumericError("flow: non-finite dt or dW");

    FlowMatrix out;
    out.dt = dt;
    out.dW = dW;
    if (diagonal_) {
        out.diagonal = true;
        out.diag.resize(d_);
        for (std::size_t k = 0; k < d_; ++k) {
            double e = drift_corr_diag_[k] * dt;
            for (std::size_t i = 0; i < m_; ++i) e += b_diag_[i][k] * dW[i];
            out.diag[k] = std::exp(sign * e);
        }
    } else {
        out.diagonal = false;
        Matrix e = drift_corr_dense_ * dt;
        for (std::size_t i = 0; i < m_; ++i) e += b_dense_[i] * dW[i];
        out.dense = matrix_exp(e * sign);
    }
    return out;
}

FlowMatrix GbmFlow::matrix(double dt, const Vec& dW) const { return build(dt, dW, 1.0); }

FlowMatrix GbmFlow::inverse_matrix(double dt, const Vec& dW) const {
    return build(dt, dW, -1.0);
}

Vec GbmFlow::apply(double dt, const Vec& dW, const Vec& v) const {
    return matrix(dt, dW).apply(v);
}

FlowMatrix flow_matrix(const Matrix& a, const std::vector<Matrix>& b,
                       double dt, const Vec& dW) {
    return GbmFlow(a, b).matrix(dt, dW);
}

FlowMatrix inverse_flow_matrix(const Matrix& a, const std::vector<Matrix>& b,
                               double dt, const Vec& dW) {
    return GbmFlow(a, b).inverse_matrix(dt, dW);
}

}  // namespace sdegbm
