#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sdegbm {

using Vec = std::vector<double>;

double norm2(const Vec& v);
bool all_finite(const Vec& v);
Vec& axpy(Vec& y, double a, const Vec& x);  // y += a*x
Vec scaled(const Vec& v, double a);

// Small dense row-major matrix. Sized for d <= a few hundred; everything the
// flow and model layers need lives here so no external linear algebra
// dependency is pulled in.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(const Vec& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool is_square() const { return rows_ == cols_; }
    bool is_diagonal() const;  // exact: every off-diagonal entry == 0
    bool all_finite() const;
    Vec diagonal_vector() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double a);
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    Matrix operator*(const Matrix& o) const;
    Vec apply(const Vec& v) const;

    double frobenius_norm() const;
    double one_norm() const;  // max column sum

    const double* data() const { return data_.data(); }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Solves A X = B by LU with partial pivoting. Throws NumericError on a
// numerically singular pivot.
Matrix lu_solve(Matrix a, Matrix b);

// Matrix exponential: diagonal inputs go elementwise, dense inputs use
// scaling-and-squaring with the degree-13 Pade approximant.
Matrix matrix_exp(const Matrix& m);

}  // namespace sdegbm
