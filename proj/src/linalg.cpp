#include "forgelab/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>

namespace forgelab::linalg {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMajor> as_eigen(const Matrix& m) {
    return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

Matrix from_eigen(const EigenRowMajor& e) {
    Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    EigenRowMajor::Map(out.data().data(), e.rows(), e.cols()) = e;
    return out;
}

void check_finite(const Vector& data) {
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("matrix entries must be finite");
        }
    }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("matrix data length must equal rows * cols");
    }
    check_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("ragged initializer for matrix");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
    check_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_column(const Vector& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Vector Matrix::col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

Vector Matrix::row(std::size_t i) const {
    Vector v(cols_);
    for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
    return v;
}

void Matrix::set_col(std::size_t j, const Vector& v) {
    if (v.size() != rows_) throw std::invalid_argument("set_col: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator+(const Matrix& o) const {
    check_same_shape(*this, o, "add");
    Matrix out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] + o.data_[k];
    return out;
}

Matrix Matrix::operator-(const Matrix& o) const {
    check_same_shape(*this, o, "sub");
    Matrix out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] - o.data_[k];
    return out;
}

Matrix Matrix::operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matmul: inner dimension mismatch");
    Matrix out(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* lhs = &data_[i * cols_];
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = lhs[k];
            if (a == 0.0) continue;
            const double* rhs = &o.data_[k * o.cols_];
            double* dst = &out.data_[i * o.cols_];
            for (std::size_t j = 0; j < o.cols_; ++j) dst[j] += a * rhs[j];
        }
    }
    return out;
}

Vector Matrix::operator*(const Vector& v) const {
    if (cols_ != v.size()) throw std::invalid_argument("matvec: dimension mismatch");
    Vector out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        const double* lhs = &data_[i * cols_];
        for (std::size_t k = 0; k < cols_; ++k) acc += lhs[k] * v[k];
        out[i] = acc;
    }
    return out;
}

Matrix Matrix::scaled(double s) const {
    Matrix out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] * s;
    return out;
}

double Matrix::frobenius_norm() const {
    double acc = 0.0;
    for (double x : data_) acc += x * x;
    return std::sqrt(acc);
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::fabs(x));
    return m;
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

void Tolerance::validate() const {
    if (!(rank_rel_tol > 0.0) || !(rank_rel_tol < 1.0)) {
        throw std::invalid_argument("rank_rel_tol must lie in (0, 1)");
    }
    if (!(residual_abs_tol > 0.0)) {
        throw std::invalid_argument("residual_abs_tol must be positive");
    }
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: length mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    std::size_t out_rows = 0;
    std::size_t out_cols = 0;
    if (__builtin_mul_overflow(a.rows(), b.rows(), &out_rows) ||
        __builtin_mul_overflow(a.cols(), b.cols(), &out_cols)) {
        throw std::overflow_error("kron: product shape overflows");
    }
    std::size_t total = 0;
    if (__builtin_mul_overflow(out_rows, out_cols, &total) || total > (1ULL << 32)) {
        throw std::overflow_error("kron: product shape overflows");
    }
    Matrix out(out_rows, out_cols);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    out(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    }
    return out;
}

Vector vec(const Matrix& a) {
    Vector v(a.rows() * a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) v[j * a.rows() + i] = a(i, j);
    return v;
}

Matrix unvec(const Vector& v, std::size_t rows, std::size_t cols) {
    if (v.size() != rows * cols) throw std::invalid_argument("unvec: length mismatch");
    Matrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
    return m;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols()) throw std::invalid_argument("vstack: column mismatch");
    Matrix out(top.rows() + bottom.rows(), top.cols());
    for (std::size_t i = 0; i < top.rows(); ++i)
        for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
    for (std::size_t i = 0; i < bottom.rows(); ++i)
        for (std::size_t j = 0; j < bottom.cols(); ++j) out(top.rows() + i, j) = bottom(i, j);
    return out;
}

Svd svd(const Matrix& a) {
    if (!a.all_finite()) throw std::invalid_argument("svd: entries must be finite");
    // Work on a tall matrix and swap factors back afterwards. JacobiSVD is
    // used instead of BDCSVD: the divide-and-conquer path miscomputes
    // factorizations of matrices with highly repeated singular values
    // (Kronecker-structured systems hit this), returning orthonormal factors
    // that do not reproduce the input.
    if (a.rows() < a.cols()) {
        Svd t = svd(a.transposed());
        return Svd{t.vt.transposed(), std::move(t.singular_values), t.u.transposed()};
    }
    Eigen::JacobiSVD<EigenRowMajor> dec(as_eigen(a), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (dec.info() != Eigen::Success) {
        throw std::runtime_error("svd: decomposition did not converge");
    }
    Svd out;
    out.u = from_eigen(dec.matrixU());
    out.vt = from_eigen(dec.matrixV().transpose());
    const auto& s = dec.singularValues();
    out.singular_values.assign(s.data(), s.data() + s.size());

    // cheap self-check: scale the leading columns of u by s and multiply back
    Matrix scaled_u(a.rows(), a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double sj = j < out.singular_values.size() ? out.singular_values[j] : 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) scaled_u(i, j) = out.u(i, j) * sj;
    }
    const double smax = out.singular_values.empty() ? 0.0 : out.singular_values[0];
    if ((scaled_u * out.vt - a).max_abs() > 1e-9 * std::max(1.0, smax)) {
        throw std::runtime_error("svd: factorization failed the reconstruction check");
    }
    return out;
}

std::size_t rank(const Matrix& a, const Tolerance& tol) {
    tol.validate();
    if (a.size() == 0) return 0;
    const Svd dec = svd(a);
    if (dec.singular_values.empty() || dec.singular_values[0] == 0.0) return 0;
    const double cutoff = tol.rank_rel_tol * dec.singular_values[0];
    std::size_t r = 0;
    for (double s : dec.singular_values)
        if (s > cutoff) ++r;
    return r;
}

Matrix pinv(const Matrix& a, const Tolerance& tol) {
    tol.validate();
    const Svd dec = svd(a);
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const std::size_t k = dec.singular_values.size();
    const double smax = k ? dec.singular_values[0] : 0.0;
    const double cutoff = tol.rank_rel_tol * smax;
    // a+ = v * diag(1/s) * u^T over the retained spectrum
    Matrix out(n, m);
    for (std::size_t t = 0; t < k; ++t) {
        const double s = dec.singular_values[t];
        if (!(s > cutoff) || s == 0.0) break;
        const double inv = 1.0 / s;
        for (std::size_t i = 0; i < n; ++i) {
            const double vi = dec.vt(t, i) * inv;
            if (vi == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) out(i, j) += vi * dec.u(j, t);
        }
    }
    return out;
}

Matrix nullspace(const Matrix& a, const Tolerance& tol) {
    tol.validate();
    const Svd dec = svd(a);
    const double smax = dec.singular_values.empty() ? 0.0 : dec.singular_values[0];
    const double cutoff = tol.rank_rel_tol * smax;
    std::size_t r = 0;
    for (double s : dec.singular_values)
        if (smax > 0.0 && s > cutoff) ++r;
    const std::size_t n = a.cols();
    Matrix basis(n, n - r);
    for (std::size_t t = r; t < n; ++t)
        for (std::size_t i = 0; i < n; ++i) basis(i, t - r) = dec.vt(t, i);
    return basis;
}

LsSolution solve_ls(const Matrix& a, const Matrix& rhs, const Tolerance& tol) {
    if (a.rows() != rhs.rows()) throw std::invalid_argument("solve_ls: row mismatch");
    tol.validate();
    LsSolution out;
    out.solution = pinv(a, tol) * rhs;
    const double residual = (a * out.solution - rhs).frobenius_norm();
    out.consistent = residual <= tol.residual_abs_tol * std::max(1.0, rhs.frobenius_norm());
    return out;
}

}  // namespace forgelab::linalg
