#include "cgp/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "cgp/error.hpp"

namespace cgp {

namespace {

// Parallel regions only pay off past this many scalar ops.
constexpr long kParallelCutoff = 1 << 15;

// Fixed reduction block: partial sums are formed per block and combined in
// block order, independent of the thread count.
constexpr std::size_t kReduceBlock = 4096;

void check_mul(int inner_a, int inner_b, const char* op) {
    if (inner_a != inner_b)
        throw contract_error(std::string(op) + ": inner dimensions disagree");
}

}  // namespace

Matrix::Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(r) * c)
        throw contract_error("Matrix: data length does not equal rows * cols");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Matrix::require_finite(const std::string& what) const {
    if (!all_finite()) throw contract_error(what + ": non-finite entries");
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul(a.cols, b.rows, "matmul");
    Matrix c(a.rows, b.cols);
    const long work = static_cast<long>(a.rows) * a.cols * b.cols;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < a.rows; ++i) {
        double* crow = c.row_ptr(i);
        const double* arow = a.row_ptr(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_mul(a.rows, b.rows, "matmul_tn");
    Matrix c(a.cols, b.cols);
    const long work = static_cast<long>(a.cols) * a.rows * b.cols;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < a.cols; ++i) {
        double* crow = c.row_ptr(i);
        for (int k = 0; k < a.rows; ++k) {
            const double aki = a.at(k, i);
            if (aki == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_mul(a.cols, b.cols, "matmul_nt");
    Matrix c(a.rows, b.rows);
    const long work = static_cast<long>(a.rows) * a.cols * b.rows;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < a.rows; ++i) {
        double* crow = c.row_ptr(i);
        const double* arow = a.row_ptr(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = b.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

Matrix add_scaled(const Matrix& a, const Matrix& b, double s) {
    Matrix c = a;
    axpy(c, b, s);
    return c;
}

void axpy(Matrix& a, const Matrix& b, double s) {
    if (a.rows != b.rows || a.cols != b.cols) throw contract_error("axpy: shape mismatch");
    const long n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (long i = 0; i < n; ++i) a.data[i] += s * b.data[i];
}

void scale(Matrix& a, double s) {
    const long n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (long i = 0; i < n; ++i) a.data[i] *= s;
}

double frobenius_norm_sq(const Matrix& a) {
    const std::size_t n = a.size();
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    if (nblocks <= 1) return serial::frobenius_norm_sq(a);
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) if (static_cast<long>(n) > kParallelCutoff)
    for (long b = 0; b < static_cast<long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += a.data[i] * a.data[i];
        partial[b] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) {
        const double av = std::fabs(v);
        if (av > m) m = av;
    }
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double orthonormality_defect(const Matrix& s) {
    if (s.cols == 0) return 0.0;
    Matrix g = matmul_tn(s, s);
    for (int i = 0; i < g.rows; ++i) g.at(i, i) -= 1.0;
    return max_abs(g);
}

std::vector<double> column(const Matrix& a, int c) {
    std::vector<double> v(static_cast<std::size_t>(a.rows));
    for (int i = 0; i < a.rows; ++i) v[i] = a.at(i, c);
    return v;
}

void append_column(Matrix& a, const std::vector<double>& col) {
    if (a.cols == 0) {
        a.rows = static_cast<int>(col.size());
        a.cols = 1;
        a.data = col;
        return;
    }
    if (static_cast<int>(col.size()) != a.rows)
        throw contract_error("append_column: row count mismatch");
    Matrix out(a.rows, a.cols + 1);
    for (int i = 0; i < a.rows; ++i) {
        const double* src = a.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (int j = 0; j < a.cols; ++j) dst[j] = src[j];
        dst[a.cols] = col[i];
    }
    a = std::move(out);
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.rows != b.rows) throw contract_error("hstack: row count mismatch");
    Matrix c(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* dst = c.row_ptr(i);
        const double* pa = a.row_ptr(i);
        const double* pb = b.row_ptr(i);
        for (int j = 0; j < a.cols; ++j) dst[j] = pa[j];
        for (int j = 0; j < b.cols; ++j) dst[a.cols + j] = pb[j];
    }
    return c;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul(a.cols, b.rows, "serial::matmul");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
            c.at(i, j) = acc;
        }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_mul(a.rows, b.rows, "serial::matmul_tn");
    Matrix c(a.cols, b.cols);
    for (int i = 0; i < a.cols; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.rows; ++k) acc += a.at(k, i) * b.at(k, j);
            c.at(i, j) = acc;
        }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_mul(a.cols, b.cols, "serial::matmul_nt");
    Matrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.rows; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(j, k);
            c.at(i, j) = acc;
        }
    return c;
}

double frobenius_norm_sq(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v * v;
    return acc;
}

}  // namespace serial

}  // namespace cgp
