#ifndef CGP_MATRIX_HPP
#define CGP_MATRIX_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace cgp {

// Dense row-major double matrix. The universal numeric carrier:
// representations, weights, bases and gradients are all Matrix values.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    Matrix(int r, int c, std::vector<double> values);

    static Matrix identity(int n);

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    bool empty() const { return rows == 0 || cols == 0; }
    std::size_t size() const { return data.size(); }

    bool all_finite() const;
    // Throws contract_error when an entry is NaN/Inf.
    void require_finite(const std::string& what) const;
};

bool operator==(const Matrix& a, const Matrix& b);

// ---- kernels --------------------------------------------------------------
//
// The kernels below are OpenMP-parallel over independent output elements.
// Every output entry is accumulated by one thread in a fixed index order, and
// reductions use fixed-size blocks, so results are bitwise identical for any
// thread count. Serial reference implementations live in cgp::serial and are
// used by the unit tests and the kernel benchmark.

Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T

Matrix transpose(const Matrix& a);

// a + s * b, shapes must match
Matrix add_scaled(const Matrix& a, const Matrix& b, double s);
// a += s * b in place
void axpy(Matrix& a, const Matrix& b, double s);
void scale(Matrix& a, double s);

double frobenius_norm_sq(const Matrix& a);
double max_abs(const Matrix& a);
double dot(const std::vector<double>& a, const std::vector<double>& b);

// max-abs entry of S^T S - I; 0 for an empty basis
double orthonormality_defect(const Matrix& s);

// column utilities for basis bookkeeping
std::vector<double> column(const Matrix& a, int c);
void append_column(Matrix& a, const std::vector<double>& col);
Matrix hstack(const Matrix& a, const Matrix& b);

namespace serial {

// Straight-line loops, no pragmas. Kept as the reference the parallel
// kernels are checked and benchmarked against.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
double frobenius_norm_sq(const Matrix& a);

}  // namespace serial

}  // namespace cgp

#endif
