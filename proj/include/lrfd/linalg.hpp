#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lrfd/matrix.hpp"
#include "lrfd/svd.hpp"

namespace lrfd {

enum class NormKind { Operator, Frobenius, Nuclear };

// Moore-Penrose pseudo-inverse via the thin SVD: V * diag(1/sigma) * Uᵀ.
inline Matrix pinv(const Matrix& m) {
    const ThinSvd f = thin_svd(m);
    if (f.rank() == 0) return Matrix(m.cols(), m.rows(), 0.0);
    Matrix scaled = f.v;
    for (std::size_t k = 0; k < f.rank(); ++k) {
        double* c = scaled.col(k);
        for (std::size_t i = 0; i < scaled.rows(); ++i) c[i] /= f.sigma[k];
    }
    return scaled * f.u.transpose();
}

// Singular value thresholding, the proximal operator of tau * nuclear norm:
// U * diag(max(sigma_i - tau, 0)) * Vᵀ.
inline Matrix svt(const Matrix& m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("svt: tau must be non-negative");
    const ThinSvd f = thin_svd(m);
    std::size_t keep = 0;
    while (keep < f.rank() && f.sigma[keep] > tau) ++keep;
    if (keep == 0) return Matrix(m.rows(), m.cols(), 0.0);
    Matrix scaled(m.rows(), keep);
    for (std::size_t k = 0; k < keep; ++k) {
        const double sk = f.sigma[k] - tau;
        const double* uk = f.u.col(k);
        double* c = scaled.col(k);
        for (std::size_t i = 0; i < m.rows(); ++i) c[i] = uk[i] * sk;
    }
    Matrix vkeep(m.cols(), keep);
    for (std::size_t k = 0; k < keep; ++k)
        std::copy_n(f.v.col(k), m.cols(), vkeep.col(k));
    return scaled * vkeep.transpose();
}

inline double norm(const Matrix& m, NormKind kind) {
    if (!m.is_finite())
        throw std::invalid_argument("norm: matrix has non-finite entries");
    switch (kind) {
    case NormKind::Frobenius:
        return m.frobenius_norm();
    case NormKind::Operator: {
        const ThinSvd f = thin_svd(m);
        return f.rank() ? f.sigma.front() : 0.0;
    }
    case NormKind::Nuclear: {
        const ThinSvd f = thin_svd(m);
        double s = 0.0;
        for (double x : f.sigma) s += x;
        return s;
    }
    }
    return 0.0;
}

// Rescales every column to unit l2 norm; columns that are numerically zero
// (norm <= 4 eps * largest column norm) are dropped.
inline Matrix normalize_columns(const Matrix& m) {
    std::vector<double> norms(m.cols());
    double max_norm = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        const double* c = m.col(j);
        for (std::size_t i = 0; i < m.rows(); ++i) s += c[i] * c[i];
        norms[j] = std::sqrt(s);
        max_norm = std::max(max_norm, norms[j]);
    }
    const double drop = 4.0 * std::numeric_limits<double>::epsilon() * max_norm;
    std::size_t kept = 0;
    for (double nj : norms)
        if (nj > drop) ++kept;
    if (kept == 0) throw std::invalid_argument("normalize_columns: empty dictionary");
    Matrix out(m.rows(), kept);
    std::size_t o = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (norms[j] <= drop) continue;
        const double* c = m.col(j);
        double* d = out.col(o++);
        for (std::size_t i = 0; i < m.rows(); ++i) d[i] = c[i] / norms[j];
    }
    return out;
}

// Orthonormal basis of the column span via modified Gram-Schmidt with one
// re-orthogonalization pass. Columns that fall below the rank tolerance are
// skipped, so the result can have fewer columns than the input.
inline Matrix orthonormalize_columns(const Matrix& m) {
    Matrix q(m.rows(), m.cols());
    std::size_t kept = 0;
    const double tol = static_cast<double>(m.rows()) *
                       std::numeric_limits<double>::epsilon();
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::vector<double> w(m.col(j), m.col(j) + m.rows());
        const double initial = std::sqrt(
            std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < kept; ++k) {
                const double* qk = q.col(k);
                double proj = 0.0;
                for (std::size_t i = 0; i < m.rows(); ++i) proj += qk[i] * w[i];
                for (std::size_t i = 0; i < m.rows(); ++i) w[i] -= proj * qk[i];
            }
        }
        const double nw = std::sqrt(
            std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        if (nw <= tol * std::max(1.0, initial)) continue;
        double* qj = q.col(kept);
        for (std::size_t i = 0; i < m.rows(); ++i) qj[i] = w[i] / nw;
        ++kept;
    }
    if (kept == 0)
        throw std::invalid_argument("orthonormalize_columns: zero matrix");
    if (kept == q.cols()) return q;
    Matrix out(m.rows(), kept);
    for (std::size_t k = 0; k < kept; ++k)
        std::copy_n(q.col(k), m.rows(), out.col(k));
    return out;
}

// Largest eigenvalue of AᵀA (squared operator norm of A) by power
// iteration: 50 iterations, early exit at relative change 1e-10.
inline double operator_norm_sq(const Matrix& a, std::uint64_t seed = 0x5eed) {
    Rng rng(seed);
    std::vector<double> v(a.cols());
    for (double& x : v) x = rng.next_gaussian();
    std::vector<double> av(a.rows());
    double est = 0.0;
    for (int it = 0; it < 50; ++it) {
        double nv = 0.0;
        for (double x : v) nv += x * x;
        nv = std::sqrt(nv);
        if (nv == 0.0) return 0.0;
        for (double& x : v) x /= nv;

        std::fill(av.begin(), av.end(), 0.0);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double* cj = a.col(j);
            const double vj = v[j];
            for (std::size_t i = 0; i < a.rows(); ++i) av[i] += cj[i] * vj;
        }
        for (std::size_t j = 0; j < a.cols(); ++j) { // v <- AᵀAv
            const double* cj = a.col(j);
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) s += cj[i] * av[i];
            v[j] = s;
        }
        double next = 0.0; // |Av|² with unit v: Rayleigh quotient of AᵀA
        for (double x : av) next += x * x;
        if (it > 0 && std::abs(next - est) <= 1e-10 * std::max(1.0, next)) {
            est = next;
            break;
        }
        est = next;
    }
    return est;
}

} // namespace lrfd
