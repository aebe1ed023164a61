#include "cgp/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cgp/error.hpp"

namespace cgp {

namespace {

constexpr int kMaxSweeps = 64;
constexpr double kOrthTol = 1e-14;    // relative column-orthogonality target
constexpr double kZeroNorm = 1e-290;  // below this a column counts as zero
constexpr double kDeflate = 1e-14;    // columns this far under the largest are noise

// One-sided Jacobi on a tall (or square) matrix: rotate columns of w until
// mutually orthogonal, accumulating rotations in v. Afterwards
// w = u * diag(sigma) and a = w * v^T.
//
// Columns whose norm drops this far below the largest are rounding debris of
// the rotations (or of an upstream residualization); they carry no reliable
// direction and would keep re-correlating with everything, so they are
// deflated to exact zero before each sweep.
void jacobi_orthogonalize(Matrix& w, Matrix& v) {
    const int m = w.rows;
    const int n = w.cols;
    if (n <= 1) return;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_norm_sq = 0.0;
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += w.at(i, j) * w.at(i, j);
            if (acc > max_norm_sq) max_norm_sq = acc;
        }
        const double floor = max_norm_sq * kDeflate * kDeflate;
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += w.at(i, j) * w.at(i, j);
            if (acc < floor)
                for (int i = 0; i < m; ++i) w.at(i, j) = 0.0;
        }

        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double wp = w.at(i, p), wq = w.at(i, q);
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if (std::fabs(apq) <= kOrthTol * std::sqrt(app * aqq)) continue;
                rotated = true;

                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double wp = w.at(i, p), wq = w.at(i, q);
                    w.at(i, p) = c * wp - s * wq;
                    w.at(i, q) = s * wp + c * wq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v.at(i, p), vq = v.at(i, q);
                    v.at(i, p) = c * vp - s * vq;
                    v.at(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) return;
    }
    throw numeric_error("svd did not converge in " + std::to_string(kMaxSweeps) + " sweeps on a " +
                        std::to_string(w.rows) + "x" + std::to_string(w.cols) + " matrix");
}

// Deterministic completion of a left-singular-vector column whose singular
// value is zero: the standard basis vector with the largest residual against
// the columns already in u, re-orthogonalized twice.
void complete_column(Matrix& u, int col) {
    const int m = u.rows;
    std::vector<double> cand(static_cast<std::size_t>(m));
    auto orthogonalize = [&](int passes) {
        for (int pass = 0; pass < passes; ++pass)
            for (int j = 0; j < u.cols; ++j) {
                if (j == col) continue;
                double proj = 0.0;
                for (int i = 0; i < m; ++i) proj += cand[i] * u.at(i, j);
                for (int i = 0; i < m; ++i) cand[i] -= proj * u.at(i, j);
            }
        double nrm2 = 0.0;
        for (double x : cand) nrm2 += x * x;
        return nrm2;
    };

    int best_e = -1;
    double best_nrm2 = 0.0;
    for (int e = 0; e < m; ++e) {
        for (int i = 0; i < m; ++i) cand[i] = (i == e) ? 1.0 : 0.0;
        const double nrm2 = orthogonalize(1);
        if (nrm2 > best_nrm2) {
            best_nrm2 = nrm2;
            best_e = e;
        }
    }
    if (best_e < 0 || best_nrm2 < 1e-20)
        throw numeric_error("svd: failed to complete an orthonormal basis column");

    for (int i = 0; i < m; ++i) cand[i] = (i == best_e) ? 1.0 : 0.0;
    const double nrm2 = orthogonalize(2);
    const double inv = 1.0 / std::sqrt(nrm2);
    for (int i = 0; i < m; ++i) u.at(i, col) = cand[i] * inv;
}

// Largest-magnitude entry of each u column made non-negative; vt row flipped
// along with it so the product is unchanged.
void fix_signs(Matrix& u, Matrix& vt) {
    for (int j = 0; j < u.cols; ++j) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < u.rows; ++i) {
            const double av = std::fabs(u.at(i, j));
            if (av > best) {
                best = av;
                arg = i;
            }
        }
        if (u.at(arg, j) < 0.0) {
            for (int i = 0; i < u.rows; ++i) u.at(i, j) = -u.at(i, j);
            for (int k = 0; k < vt.cols; ++k) vt.at(j, k) = -vt.at(j, k);
        }
    }
}

SvdResult svd_tall(const Matrix& a) {
    const int m = a.rows, n = a.cols;
    Matrix w = a;
    Matrix v = Matrix::identity(n);
    jacobi_orthogonalize(w, v);

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += w.at(i, j) * w.at(i, j);
        norms[j] = std::sqrt(acc);
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return norms[x] > norms[y]; });

    SvdResult r;
    r.u = Matrix(m, n);
    r.sigma.resize(static_cast<std::size_t>(n));
    r.vt = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        const double sg = norms[src];
        r.sigma[j] = sg > kZeroNorm ? sg : 0.0;
        if (r.sigma[j] > 0.0) {
            const double inv = 1.0 / sg;
            for (int i = 0; i < m; ++i) r.u.at(i, j) = w.at(i, src) * inv;
        }
        for (int i = 0; i < n; ++i) r.vt.at(j, i) = v.at(i, src);
    }
    for (int j = 0; j < n; ++j)
        if (r.sigma[j] == 0.0) complete_column(r.u, j);
    return r;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (a.empty()) throw contract_error("svd: empty matrix");
    a.require_finite("svd input");

    if (a.rows >= a.cols) {
        SvdResult r = svd_tall(a);
        fix_signs(r.u, r.vt);
        return r;
    }
    // wide: factor the transpose and swap the roles of u and v
    SvdResult t = svd_tall(transpose(a));
    SvdResult r;
    r.sigma = std::move(t.sigma);
    r.u = transpose(t.vt);  // m x m
    r.vt = transpose(t.u);  // m x n
    fix_signs(r.u, r.vt);
    return r;
}

Matrix svd_reconstruct(const SvdResult& r) {
    Matrix us = r.u;
    for (int j = 0; j < us.cols; ++j)
        for (int i = 0; i < us.rows; ++i) us.at(i, j) *= r.sigma[static_cast<std::size_t>(j)];
    return matmul(us, r.vt);
}

}  // namespace cgp
