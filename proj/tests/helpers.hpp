#pragma once

// Test-only oracles, kept independent of the library's SVD path: a
// Gauss-Jordan inverse for normal-equation pseudo-inverses and a cyclic
// Jacobi eigensolver for symmetric matrices (spectra, nuclear norms).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lrfd/matrix.hpp"
#include "lrfd/rng.hpp"

namespace testutil {

inline lrfd::Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    lrfd::Rng rng(seed);
    return lrfd::Matrix::gaussian(rows, cols, rng);
}

inline lrfd::Matrix diag(const std::vector<double>& d) {
    lrfd::Matrix m(d.size(), d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

// Gauss-Jordan inverse with partial pivoting; throws on singular input.
inline lrfd::Matrix gauss_jordan_inverse(lrfd::Matrix a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("inverse: square only");
    const std::size_t n = a.rows();
    lrfd::Matrix inv = lrfd::Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) throw std::runtime_error("inverse: singular matrix");
        if (pivot != col)
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(col, c), a(pivot, c));
                std::swap(inv(col, c), inv(pivot, c));
            }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
// descending. Independent of the library's bidiagonalization SVD.
inline std::vector<double> jacobi_eigenvalues(lrfd::Matrix s) {
    if (s.rows() != s.cols()) throw std::invalid_argument("jacobi: square only");
    const std::size_t n = s.rows();
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (apq == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = s(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

// Singular values through the Gram matrix and the Jacobi oracle.
inline std::vector<double> jacobi_singular_values(const lrfd::Matrix& m) {
    const bool wide = m.rows() < m.cols();
    const lrfd::Matrix g = wide ? m * m.transpose()
                                : lrfd::transpose_times(m, m);
    std::vector<double> eig = jacobi_eigenvalues(g);
    for (double& v : eig) v = std::sqrt(std::max(0.0, v));
    return eig;
}

inline double jacobi_nuclear_norm(const lrfd::Matrix& m) {
    double s = 0.0;
    for (double v : jacobi_singular_values(m)) s += v;
    return s;
}

// Nuclear norm via the symmetric embedding [[0, M], [Mᵀ, 0]], whose
// eigenvalues are plus-minus the singular values. Unlike the Gram route,
// small singular values come out with full precision.
inline double jacobi_nuclear_norm_precise(const lrfd::Matrix& m) {
    const std::size_t r = m.rows(), c = m.cols(), n = r + c;
    lrfd::Matrix s(n, n, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            s(i, r + j) = m(i, j);
            s(r + j, i) = m(i, j);
        }
    double total = 0.0;
    for (double v : jacobi_eigenvalues(std::move(s))) total += std::abs(v);
    return 0.5 * total;
}

inline double max_abs_diff(const lrfd::Matrix& a, const lrfd::Matrix& b) {
    return (a - b).max_abs();
}

} // namespace testutil
