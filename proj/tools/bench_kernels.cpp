// Times the OpenMP kernels against the serial reference implementations and
// cross-checks their results. Build with -fopenmp to see the parallel path.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cgp/matrix.hpp"
#include "cgp/rng.hpp"

namespace {

using cgp::Matrix;

Matrix random_matrix(int rows, int cols, cgp::Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

template <typename F>
double time_ms(int iters, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / iters;
}

double rel_diff(const Matrix& a, const Matrix& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        num += d * d;
        den += b.data[i] * b.data[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

int main(int argc, char** argv) {
    int n = 384;
    int iters = 3;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--n" && i + 1 < argc) n = std::atoi(argv[++i]);
        else if (arg == "--iters" && i + 1 < argc) iters = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--n N] [--iters I]\n", argv[0]);
            return 2;
        }
    }

#ifdef _OPENMP
    std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled at build time\n");
#endif
    std::printf("size %d, %d iteration(s) per kernel\n\n", n, iters);
    std::printf("%-18s %12s %12s %9s %12s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "rel diff");

    cgp::Rng rng(42);
    const Matrix a = random_matrix(n, n, rng);
    const Matrix b = random_matrix(n, n, rng);
    const Matrix basis = random_matrix(n, n / 8, rng);

    {
        Matrix rs, rp;
        const double ts = time_ms(iters, [&] { rs = cgp::serial::matmul(a, b); });
        const double tp = time_ms(iters, [&] { rp = cgp::matmul(a, b); });
        std::printf("%-18s %12.2f %12.2f %8.2fx %12.2e\n", "matmul", ts, tp, ts / tp,
                    rel_diff(rp, rs));
    }
    {
        Matrix rs, rp;
        const double ts = time_ms(iters, [&] { rs = cgp::serial::matmul_tn(a, b); });
        const double tp = time_ms(iters, [&] { rp = cgp::matmul_tn(a, b); });
        std::printf("%-18s %12.2f %12.2f %8.2fx %12.2e\n", "matmul_tn", ts, tp, ts / tp,
                    rel_diff(rp, rs));
    }
    {
        Matrix rs, rp;
        const double ts = time_ms(iters, [&] { rs = cgp::serial::matmul_nt(a, b); });
        const double tp = time_ms(iters, [&] { rp = cgp::matmul_nt(a, b); });
        std::printf("%-18s %12.2f %12.2f %8.2fx %12.2e\n", "matmul_nt", ts, tp, ts / tp,
                    rel_diff(rp, rs));
    }
    {
        // gradient projection composite: g - (g S) S^T
        Matrix rs, rp;
        const double ts = time_ms(iters, [&] {
            Matrix coords = cgp::serial::matmul(a, basis);
            Matrix proj = cgp::serial::matmul_nt(coords, basis);
            rs = cgp::add_scaled(a, proj, -1.0);
        });
        const double tp = time_ms(iters, [&] {
            Matrix coords = cgp::matmul(a, basis);
            Matrix proj = cgp::matmul_nt(coords, basis);
            rp = cgp::add_scaled(a, proj, -1.0);
        });
        std::printf("%-18s %12.2f %12.2f %8.2fx %12.2e\n", "projection", ts, tp, ts / tp,
                    rel_diff(rp, rs));
    }
    {
        double vs = 0.0, vp = 0.0;
        const double ts = time_ms(iters * 8, [&] { vs = cgp::serial::frobenius_norm_sq(a); });
        const double tp = time_ms(iters * 8, [&] { vp = cgp::frobenius_norm_sq(a); });
        std::printf("%-18s %12.3f %12.3f %8.2fx %12.2e\n", "frobenius", ts, tp, ts / tp,
                    std::fabs(vp - vs) / vs);
    }
    return 0;
}
