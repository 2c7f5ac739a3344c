#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace forgelab::linalg {

using Vector = std::vector<double>;

// Dense real matrix, row-major storage. Entries are validated to be finite
// whenever a matrix is constructed from raw data.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);  // zero-filled
    Matrix(std::size_t rows, std::size_t cols, Vector data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix from_column(const Vector& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    Vector col(std::size_t j) const;
    Vector row(std::size_t i) const;
    void set_col(std::size_t j, const Vector& v);

    Matrix transposed() const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix operator*(const Matrix& o) const;   // accumulates over k in index order
    Vector operator*(const Vector& v) const;
    Matrix scaled(double s) const;

    double frobenius_norm() const;
    double max_abs() const;
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

// Numeric-rank and residual cutoffs shared by the decomposition-backed ops.
struct Tolerance {
    double rank_rel_tol = 1e-10;     // relative singular-value cutoff
    double residual_abs_tol = 1e-8;  // absolute residual for consistency checks

    void validate() const;  // throws std::invalid_argument on bad values
};

// ---- vector helpers ----
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
Vector sub(const Vector& a, const Vector& b);

// ---- shape rearrangement ----
Matrix kron(const Matrix& a, const Matrix& b);
Vector vec(const Matrix& a);                                   // column stacking
Matrix unvec(const Vector& v, std::size_t rows, std::size_t cols);
Matrix vstack(const Matrix& top, const Matrix& bottom);

// ---- decompositions ----
// Full factorization a = u * diag(s) * vt, with u (m x m), vt (n x n) and
// s the min(m, n) singular values in non-increasing order.
struct Svd {
    Matrix u;
    Vector singular_values;
    Matrix vt;
};
Svd svd(const Matrix& a);  // throws std::runtime_error on non-convergence

std::size_t rank(const Matrix& a, const Tolerance& tol = {});
Matrix pinv(const Matrix& a, const Tolerance& tol = {});

// Orthonormal basis of the right null space, one column per basis vector.
// A trivial null space yields a matrix with zero columns (not an error).
Matrix nullspace(const Matrix& a, const Tolerance& tol = {});

// Minimum-norm least-squares solution of a * x = rhs; `consistent` reports
// whether the residual is small enough to call the system solvable.
struct LsSolution {
    Matrix solution;
    bool consistent;
};
LsSolution solve_ls(const Matrix& a, const Matrix& rhs, const Tolerance& tol = {});

}  // namespace forgelab::linalg
