#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lrfd/coherence.hpp"
#include "lrfd/linalg.hpp"
#include "lrfd/matrix.hpp"
#include "lrfd/observation.hpp"
#include "lrfd/rng.hpp"
#include "lrfd/solvers.hpp"
#include "lrfd/svd.hpp"

namespace lrfd {

// Rank estimate from a non-increasing spectrum: the number of singular
// values strictly above 1e-3 times the largest.
inline std::size_t estimate_rank(const std::vector<double>& singular_values) {
    if (singular_values.empty())
        throw std::invalid_argument("estimate_rank: empty spectrum");
    for (std::size_t i = 1; i < singular_values.size(); ++i)
        if (singular_values[i] > singular_values[i - 1])
            throw std::invalid_argument("estimate_rank: spectrum is not non-increasing");
    if (!(singular_values.front() > 0.0))
        throw std::invalid_argument("estimate_rank: spectrum must be positive");
    const double threshold = 1e-3 * singular_values.front();
    std::size_t r = 0;
    while (r < singular_values.size() && singular_values[r] > threshold) ++r;
    return r;
}

namespace detail {

inline Matrix reconstruct_top_r(const ThinSvd& f, std::size_t r, std::size_t rows,
                                std::size_t cols) {
    const std::size_t keep = std::min(r, f.rank());
    if (keep == 0) return Matrix(rows, cols, 0.0);
    Matrix scaled(rows, keep);
    for (std::size_t k = 0; k < keep; ++k) {
        const double* uk = f.u.col(k);
        double* c = scaled.col(k);
        for (std::size_t i = 0; i < rows; ++i) c[i] = uk[i] * f.sigma[k];
    }
    Matrix vkeep(cols, keep);
    for (std::size_t k = 0; k < keep; ++k)
        std::copy_n(f.v.col(k), cols, vkeep.col(k));
    return scaled * vkeep.transpose();
}

} // namespace detail

// Best rank-r approximation (Eckart-Young), keeping the top r singular
// triplets. r at or above the numerical rank returns the input up to SVD
// round-trip error.
inline Matrix truncate_to_rank(const Matrix& m, std::size_t r) {
    if (r == 0) throw std::invalid_argument("truncate_to_rank: r must be positive");
    const ThinSvd f = thin_svd(m);
    return detail::reconstruct_top_r(f, r, m.rows(), m.cols());
}

struct PipelineResult {
    Matrix cono_estimate;      // step 1
    std::size_t rank_estimate; // step 2
    Matrix truncated;          // step 3
    Matrix dictionary;         // step 4, unit-normed columns
    Matrix final_estimate;     // step 5 reconstruction
    SolverReport cono_report;
    SolverReport lrfd_report;
};

// The five-step completion pipeline: nuclear-norm completion, rank
// estimation, rank truncation, column-normalized dictionary construction,
// dictionary-constrained completion. One lambda drives both solves.
inline PipelineResult run_algorithm1(const Matrix& x, const ObservationSet& omega,
                                     double lambda = 100.0,
                                     const SolverConfig& base_cfg = {}) {
    if (omega.count() == 0)
        throw std::invalid_argument("run_algorithm1: empty observation set");
    SolverConfig cfg = base_cfg;
    cfg.lambda = lambda;

    PipelineResult out;
    out.cono_report = solve_cono(x, omega, cfg);
    out.cono_estimate = out.cono_report.solution;

    const ThinSvd f = thin_svd(out.cono_estimate);
    if (f.rank() == 0)
        throw std::runtime_error("run_algorithm1: degenerate estimate");
    out.rank_estimate = estimate_rank(f.sigma);
    out.truncated = detail::reconstruct_top_r(f, out.rank_estimate,
                                              out.cono_estimate.rows(),
                                              out.cono_estimate.cols());
    try {
        out.dictionary = normalize_columns(out.truncated);
    } catch (const std::invalid_argument&) {
        throw std::runtime_error("run_algorithm1: degenerate estimate");
    }

    out.lrfd_report = solve_lrfd(x, out.dictionary, omega, cfg);
    out.final_estimate = out.lrfd_report.reconstruction;
    return out;
}

// Diagnostics for the exact-recovery hypotheses: ranks, dictionary
// coherence, the column-space containment residual |P_{U_A}(U_0) - U_0|_F,
// the growth ratio rank(A) mu1(A) log(n1) / n2 (the bound with its unknown
// numerical constant factored out), and the observation fraction.
struct TheoremDiagnostics {
    std::size_t rank_l0 = 0;
    std::size_t rank_a = 0;
    double mu1_a = 0.0;
    double subspace_containment_residual = 0.0;
    double rank_ratio = 0.0;
    double omega_fraction = 0.0;
};

inline TheoremDiagnostics check_theorem_conditions(const Matrix& l0, const Matrix& a,
                                                   const ObservationSet& omega) {
    if (a.rows() != l0.rows())
        throw std::invalid_argument("check_theorem_conditions: dimension mismatch");
    require_shape(l0, omega, "check_theorem_conditions");

    const ThinSvd f0 = thin_svd(l0);
    const ThinSvd fa = thin_svd(a);
    TheoremDiagnostics d;
    d.rank_l0 = f0.rank();
    d.rank_a = fa.rank();
    if (fa.rank() > 0) {
        const double r = static_cast<double>(fa.rank());
        d.mu1_a = static_cast<double>(a.rows()) / r * detail::max_row_norm_sq(fa.u);
    }
    if (f0.rank() > 0 && fa.rank() > 0) {
        const Matrix projected = fa.u * transpose_times(fa.u, f0.u);
        d.subspace_containment_residual = (projected - f0.u).frobenius_norm();
    }
    const double n1 = static_cast<double>(std::max(l0.rows(), l0.cols()));
    const double n2 = static_cast<double>(std::min(l0.rows(), l0.cols()));
    d.rank_ratio = static_cast<double>(fa.rank()) * d.mu1_a * std::log(n1) / n2;
    d.omega_fraction = omega.fraction();
    return d;
}

namespace detail {

// One application of T = P_{U_A} P_{Omega-perp} P_{U_A}.
inline Matrix lemma_operator_apply(const Matrix& m, const SubspaceBasis& u,
                                   const ObservationSet& omega) {
    Matrix projected = project_column_space(m, u);
    for (const auto& ix : omega.indices()) projected(ix.i, ix.j) = 0.0;
    return project_column_space(projected, u);
}

} // namespace detail

namespace detail {

// Largest eigenvalue of a small symmetric PSD matrix by cyclic Jacobi
// rotations; unlike power iteration this converges regardless of spectral
// gaps (column blocks routinely carry near-tied eigenvalues).
inline double jacobi_top_eigenvalue(Matrix s) {
    const std::size_t r = s.rows();
    for (int sweep = 0; sweep < 40; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < r; ++p)
            for (std::size_t q = p + 1; q < r; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < r; ++p)
            for (std::size_t q = p + 1; q < r; ++q) {
                const double apq = s(p, q);
                if (apq == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < r; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < r; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
    }
    double best = 0.0;
    for (std::size_t i = 0; i < r; ++i) best = std::max(best, s(i, i));
    return best;
}

} // namespace detail

// Operator norm of M -> P_{U_A} P_{Omega-perp} P_{U_A} (M) on rows x cols
// matrices. Both projections act column by column, so the composition is
// block-diagonal across columns with blocks U (Uᵀ D_j U) Uᵀ, D_j the
// unobserved-row mask of column j; the norm is the largest eigenvalue over
// the r x r block Gram matrices G_j = Uᵀ D_j U, each solved exactly by
// Jacobi rotations. (Power iteration on the full vectorized composition
// cannot converge here: the top eigenvalues are near-ties across blocks.)
inline double lemma1_operator_norm(const SubspaceBasis& u_a, const ObservationSet& omega) {
    if (u_a.ambient_dim() != omega.rows())
        throw std::invalid_argument("lemma1_operator_norm: dimension mismatch");
    const Matrix& u = u_a.matrix();
    const std::size_t r = u.cols();
    const std::size_t n = omega.cols();

    // observed part per column: S_j = sum over observed (i,j) of u_i u_iᵀ
    std::vector<Matrix> gram(n, Matrix(r, r, 0.0));
    for (const auto& ix : omega.indices()) {
        Matrix& g = gram[ix.j];
        for (std::size_t a = 0; a < r; ++a) {
            const double uia = u(ix.i, a);
            for (std::size_t b = 0; b < r; ++b) g(a, b) += uia * u(ix.i, b);
        }
    }

    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Matrix g = std::move(gram[j]);
        for (std::size_t a = 0; a < r; ++a) { // G_j = I - S_j
            for (std::size_t b = 0; b < r; ++b) g(a, b) = -g(a, b);
            g(a, a) += 1.0;
        }
        best = std::max(best, detail::jacobi_top_eigenvalue(std::move(g)));
    }
    // the composition is a product of orthogonal projections; values at
    // roundoff scale are exact zeros
    if (best <= 1e-12) return 0.0;
    return std::min(best, 1.0);
}

// Checks the Neumann-series inverse of P_{U_A} P_Omega P_{U_A} on
// range(P_{U_A}): applies (I + sum_{i=1..terms} T^i) after the forward
// operator to random probes and returns the worst relative residual
// against the identity. Requires psi = |T| < 1.
inline double lemma2_inverse_check(const SubspaceBasis& u_a, const ObservationSet& omega,
                                   std::size_t terms,
                                   std::uint64_t probe_seed = 0x0DDB1A5E5BAD5EEDULL) {
    if (u_a.ambient_dim() != omega.rows())
        throw std::invalid_argument("lemma2_inverse_check: dimension mismatch");
    const double psi = lemma1_operator_norm(u_a, omega);
    if (psi >= 1.0 - 1e-12)
        throw std::runtime_error("lemma2_inverse_check: Neumann series diverges (psi = " +
                                 std::to_string(psi) + ")");

    constexpr int kProbes = 10;
    Rng rng(probe_seed);
    double worst = 0.0;
    for (int p = 0; p < kProbes; ++p) {
        Matrix m = project_column_space(
            Matrix::gaussian(omega.rows(), omega.cols(), rng), u_a);
        const double nm = m.frobenius_norm();
        if (nm == 0.0) continue;

        // forward: N = P_{U_A} P_Omega P_{U_A} (M)
        Matrix forward = project_omega(m, omega);
        forward = project_column_space(forward, u_a);

        Matrix acc = forward;
        Matrix cur = std::move(forward);
        for (std::size_t i = 0; i < terms; ++i) {
            cur = detail::lemma_operator_apply(cur, u_a, omega);
            acc += cur;
        }
        worst = std::max(worst, (acc - m).frobenius_norm() / nm);
    }
    return worst;
}

} // namespace lrfd
