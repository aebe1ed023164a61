#ifndef CGP_SVD_HPP
#define CGP_SVD_HPP

#include <vector>

#include "cgp/matrix.hpp"

namespace cgp {

// Thin SVD a = u * diag(sigma) * vt with r = min(rows, cols).
//   u:     rows x r, orthonormal columns
//   sigma: r non-negative values, descending
//   vt:    r x cols, orthonormal rows
struct SvdResult {
    Matrix u;
    std::vector<double> sigma;
    Matrix vt;
};

// One-sided Jacobi. Deterministic: fixed sweep order, fixed sign convention
// (largest-magnitude entry of each left singular vector is non-negative,
// first index wins ties). Throws numeric_error if rotations fail to converge.
SvdResult svd(const Matrix& a);

// u * diag(sigma) * vt, for reconstruction checks
Matrix svd_reconstruct(const SvdResult& r);

}  // namespace cgp

#endif
