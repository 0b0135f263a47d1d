#pragma once

#include <algorithm>
#include <stdexcept>

#include "lrfd/matrix.hpp"
#include "lrfd/svd.hpp"

namespace lrfd {

// The two coherence parameters of a rank-r matrix M with thin SVD U S Vᵀ:
//   mu1 = (rows/r) max_i |Uᵀ e_i|²   (column space),
//   mu2 = (cols/r) max_i |Vᵀ e_i|²   (row space).
// Both lie in [1, dimension]. mu2 grows when the data points are spread
// non-uniformly (e.g. a union of many small subspaces); mu1 does not care
// how the points are distributed inside the column space.
struct CoherenceReport {
    double mu1;
    double mu2;
    std::size_t rank_used;
};

namespace detail {

inline double max_row_norm_sq(const Matrix& basis) {
    double best = 0.0;
    for (std::size_t i = 0; i < basis.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < basis.cols(); ++k) {
            const double x = basis(i, k);
            s += x * x;
        }
        best = std::max(best, s);
    }
    return best;
}

} // namespace detail

inline CoherenceReport coherence(const Matrix& m) {
    const ThinSvd f = thin_svd(m);
    if (f.rank() == 0)
        throw std::invalid_argument("coherence: undefined for the zero matrix");
    const double r = static_cast<double>(f.rank());
    return CoherenceReport{
        static_cast<double>(m.rows()) / r * detail::max_row_norm_sq(f.u),
        static_cast<double>(m.cols()) / r * detail::max_row_norm_sq(f.v),
        f.rank(),
    };
}

// Relative recovery error |estimate - truth|_F / |truth|_F.
inline double recovery_error(const Matrix& estimate, const Matrix& truth) {
    if (!estimate.same_shape(truth))
        throw std::invalid_argument("recovery_error: dimension mismatch");
    const double denom = truth.frobenius_norm();
    if (denom == 0.0)
        throw std::invalid_argument("recovery_error: zero ground truth");
    return (estimate - truth).frobenius_norm() / denom;
}

} // namespace lrfd
