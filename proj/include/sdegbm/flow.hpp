#pragma once

#include <vector>

#include "sdegbm/linalg.hpp"

namespace sdegbm {

// Fundamental matrix of the linear SDE over one step,
//   Phi = exp((A - 1/2 sum B_i^2) dt + sum B_i dW_i),
// stored as a diagonal vector when A and every B_i are diagonal.
struct FlowMatrix {
    bool diagonal = true;
    Vec diag;      // d entries when diagonal
    Matrix dense;  // d x d otherwise
    double dt = 0.0;
    Vec dW;

    Vec apply(const Vec& v) const;
    Matrix as_matrix() const;
    FlowMatrix times(const FlowMatrix& o) const;  // same-representation product
};

// Precomputes the step-invariant exponent pieces of a model's linear parts
// so per-step flow evaluation is one exp per state component on the
// diagonal fast path.
class GbmFlow {
public:
    GbmFlow(const Matrix& a, const std::vector<Matrix>& b);

    bool diagonal() const { return diagonal_; }
    std::size_t dim() const { return d_; }
    std::size_t drivers() const { return m_; }

    FlowMatrix matrix(double dt, const Vec& dW) const;
    FlowMatrix inverse_matrix(double dt, const Vec& dW) const;
    // Applies the flow to a state without materializing the matrix.
    Vec apply(double dt, const Vec& dW, const Vec& v) const;

private:
    FlowMatrix build(double dt, const Vec& dW, double sign) const;

    std::size_t d_ = 0, m_ = 0;
    bool diagonal_ = true;
    Vec drift_corr_diag_;            // diag(A - 1/2 sum B_i^2)
    std::vector<Vec> b_diag_;        // per-driver diagonals
    Matrix drift_corr_dense_;
    std::vector<Matrix> b_dense_;
};

FlowMatrix flow_matrix(const Matrix& a, const std::vector<Matrix>& b,
                       double dt, const Vec& dW);
FlowMatrix inverse_flow_matrix(const Matrix& a, const std::vector<Matrix>& b,
                               double dt, const Vec& dW);

}  // namespace sdegbm
