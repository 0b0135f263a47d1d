#pragma once

#include <cstdint>
#include <stdexcept>

#include "lrfd/linalg.hpp"
#include "lrfd/matrix.hpp"
#include "lrfd/observation.hpp"
#include "lrfd/rng.hpp"

namespace lrfd {

// Union-of-subspaces data: k independent random subspaces of dimension
// dim_per_subspace, points_per_subspace Gaussian points drawn in each.
// Total rank is k * dim_per_subspace almost surely.
struct SubspaceMixSpec {
    std::size_t rows = 0;               // ambient dimension m
    std::size_t cols = 0;               // number of data points n
    std::size_t num_subspaces = 0;      // k
    std::size_t dim_per_subspace = 0;   // r_s
    std::size_t points_per_subspace = 0;// n_s, with k * n_s = n
    std::uint64_t seed = 0;

    void validate() const {
        if (rows == 0 || cols == 0 || num_subspaces == 0 || dim_per_subspace == 0 ||
            points_per_subspace == 0)
            throw std::invalid_argument("SubspaceMixSpec: all dimensions must be positive");
        if (num_subspaces * dim_per_subspace > std::min(rows, cols))
            throw std::invalid_argument(
                "SubspaceMixSpec: total rank exceeds min(rows, cols)");
        if (num_subspaces * points_per_subspace != cols)
            throw std::invalid_argument(
                "SubspaceMixSpec: subspaces * points_per_subspace must equal cols");
    }
};

// Entrywise Gaussian noise applied to observed entries only.
struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

inline Matrix gen_subspace_mixture(const SubspaceMixSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Matrix l0(spec.rows, spec.cols, 0.0);
    for (std::size_t s = 0; s < spec.num_subspaces; ++s) {
        const Matrix basis =
            orthonormalize_columns(Matrix::gaussian(spec.rows, spec.dim_per_subspace, rng));
        if (basis.cols() != spec.dim_per_subspace)
            throw std::runtime_error("gen_subspace_mixture: degenerate Gaussian draw");
        const Matrix coeffs =
            Matrix::gaussian(spec.dim_per_subspace, spec.points_per_subspace, rng);
        const Matrix block = basis * coeffs;
        for (std::size_t j = 0; j < spec.points_per_subspace; ++j) {
            const std::size_t dst = s * spec.points_per_subspace + j;
            std::copy_n(block.col(j), spec.rows, l0.col(dst));
        }
    }
    return l0;
}

// n x n rank-1 matrix with maximal row-space coherence: column 0 is all
// ones, everything else zero (mu1 = 1, mu2 = n).
inline Matrix gen_coherent_rank1(std::size_t n) {
    if (n < 2) throw std::invalid_argument("gen_coherent_rank1: n must be at least 2");
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, 0) = 1.0;
    return m;
}

// Dictionary adapted to the coherent rank-1 target: first column is the
// all-ones direction, followed by num_gaussian unit-normed Gaussian
// columns. Rank is num_gaussian + 1 almost surely.
inline Matrix gen_ones_plus_gaussian_dictionary(std::size_t n, std::size_t num_gaussian,
                                                std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_ones_plus_gaussian_dictionary: n == 0");
    Rng rng(seed);
    Matrix a(n, num_gaussian + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) a(i, 0) = 1.0;
    for (std::size_t j = 1; j <= num_gaussian; ++j) {
        double* c = a.col(j);
        for (std::size_t i = 0; i < n; ++i) c[i] = rng.next_gaussian();
    }
    return normalize_columns(a);
}

inline Matrix add_observation_noise(const Matrix& x, const ObservationSet& omega,
                                    const NoiseSpec& spec) {
    require_shape(x, omega, "add_observation_noise");
    if (spec.sigma < 0.0)
        throw std::invalid_argument("add_observation_noise: sigma must be non-negative");
    Matrix out = x;
    if (spec.sigma == 0.0) return out;
    Rng rng(spec.seed);
    for (const auto& ix : omega.indices())
        out(ix.i, ix.j) += spec.sigma * rng.next_gaussian();
    return out;
}

} // namespace lrfd
