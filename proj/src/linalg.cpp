#include "sdegbm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sdegbm/errors.hpp"

namespace sdegbm {

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Vec& axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    return y;
}

Vec scaled(const Vec& v, double a) {
    Vec out(v);
    for (double& x : out) x *= a;
    return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(const Vec& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

bool Matrix::is_diagonal() const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            if (i != j && data_[i * cols_ + j] != 0.0) return false;
    return true;
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Vec Matrix::diagonal_vector() const {
    Vec d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = data_[i * cols_ + i];
    return d;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double a) {
    for (double& x : data_) x *= a;
    return *this;
}

Matrix Matrix::operator*(const Matrix& o) const {
    Matrix out(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = data_[i * cols_ + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < o.cols_; ++j)
                out(i, j) += aik * o(k, j);
        }
    }
    return out;
}

Vec Matrix::apply(const Vec& v) const {
    Vec out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += data_[i * cols_ + j] * v[j];
        out[i] = s;
    }
    return out;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
}

double Matrix::one_norm() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) col += std::abs(data_[i * cols_ + j]);
        best = std::max(best, col);
    }
    return best;
}

Matrix lu_solve(Matrix a, Matrix b) {
    if (!a.is_square() || a.rows() != b.rows())
        throw ConfigError("lu_solve: incompatible shapes");
    const std::size_t n = a.rows();
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) throw NumericError("lu_solve: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = a(i, k) / a(k, k);
            a(i, k) = l;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= l * b(k, j);
        }
    }
    // back substitution
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b(ii, col);
            for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * b(j, col);
            b(ii, col) = s / a(ii, ii);
        }
    }
    return b;
}

namespace {

Matrix diag_exp(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, i) = std::exp(m(i, i));
    return out;
}

}  // namespace

Matrix matrix_exp(const Matrix& m) {
    if (!m.is_square()) throw ConfigError("matrix_exp: matrix must be square");
    if (!m.all_finite()) throw NumericError("matrix_exp: non-finite entries");
    if (m.is_diagonal()) return diag_exp(m);

    // Degree-13 Pade with scaling so the scaled norm sits inside the
    // approximant's accuracy radius (theta_13, Higham 2005).
    static const double kTheta13 = 5.371920351148152;
    static const double kB[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};

    const std::size_t n = m.rows();
    int s = 0;
    const double nrm = m.one_norm();
    if (nrm > kTheta13) s = static_cast<int>(std::ceil(std::log2(nrm / kTheta13)));
    Matrix a = m * std::pow(2.0, -s);

    const Matrix id = Matrix::identity(n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;

    Matrix u = a * (a6 * (kB[13] * a6 + kB[11] * a4 + kB[9] * a2) +
                    kB[7] * a6 + kB[5] * a4 + kB[3] * a2 + kB[1] * id);
    Matrix v = a6 * (kB[12] * a6 + kB[10] * a4 + kB[8] * a2) +
               kB[6] * a6 + kB[4] * a4 + kB[2] * a2 + kB[0] * id;

    Matrix f = lu_solve(v - u, v + u);
    for (int i = 0; i < s; ++i) f = f * f;
    return f;
}

}  // namespace sdegbm
