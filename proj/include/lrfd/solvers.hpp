#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lrfd/linalg.hpp"
#include "lrfd/matrix.hpp"
#include "lrfd/observation.hpp"
#include "lrfd/svd.hpp"

namespace lrfd {

struct SolverConfig {
    double lambda = 100.0;     // regularization weight of the quadratic fit term
    std::size_t max_iters = 5000;
    double rel_tol = 1e-7;     // relative iterate-change stopping threshold
    bool acceleration = true;  // Nesterov momentum with function-value restart
    bool continuation = true;  // threshold continuation (tau decays to its floor)

    void validate() const {
        if (!(lambda > 0.0)) throw std::invalid_argument("SolverConfig: lambda must be positive");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("SolverConfig: rel_tol must be positive");
        if (max_iters == 0) throw std::invalid_argument("SolverConfig: max_iters must be positive");
    }
};

struct SolverReport {
    Matrix solution;        // L* for the identity program, Z* for the dictionary program
    Matrix reconstruction;  // A Z* (equals solution when no dictionary is involved)
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    double terminal_relative_change = std::numeric_limits<double>::infinity();
    double fit_residual = 0.0; // |P_Omega(X - reconstruction)|_F at the solution
    bool converged = false;
};

namespace detail {

// X restricted to Omega, stored entry-aligned with omega.indices().
inline std::vector<double> observed_values(const Matrix& x, const ObservationSet& omega) {
    require_shape(x, omega, "solver");
    std::vector<double> xv;
    xv.reserve(omega.count());
    for (const auto& ix : omega.indices()) {
        const double v = x(ix.i, ix.j);
        if (!std::isfinite(v))
            throw std::invalid_argument("solver: observed entry is not finite");
        xv.push_back(v);
    }
    return xv;
}

// min_L |L|_* + (lambda/2) |P_Omega(X - L)|_F^2 iterate map.
struct IdentityProgram {
    const ObservationSet& omega;
    std::vector<double> xv;

    std::size_t var_rows() const { return omega.rows(); }
    std::size_t var_cols() const { return omega.cols(); }
    double step_scale() const { return 1.0; } // |identity|^2

    Matrix initial() const {
        Matrix l0(omega.rows(), omega.cols(), 0.0);
        std::size_t e = 0;
        for (const auto& ix : omega.indices()) l0(ix.i, ix.j) = xv[e++];
        return l0;
    }

    // y - P_Omega(y - X): observed entries replaced by data.
    Matrix prox_argument(const Matrix& y) const {
        Matrix arg = y;
        std::size_t e = 0;
        for (const auto& ix : omega.indices()) arg(ix.i, ix.j) = xv[e++];
        return arg;
    }

    double fit_norm(const Matrix& l) const {
        double s = 0.0;
        std::size_t e = 0;
        for (const auto& ix : omega.indices()) {
            const double d = xv[e++] - l(ix.i, ix.j);
            s += d * d;
        }
        return std::sqrt(s);
    }

    Matrix reconstruction(const Matrix& l) const { return l; }
};

// min_Z |Z|_* + (lambda/2) |P_Omega(X - A Z)|_F^2 iterate map.
struct DictionaryProgram {
    const ObservationSet& omega;
    std::vector<double> xv;
    const Matrix& a;   // m x d
    Matrix at;         // d x m, cached transpose so rows of A are contiguous
    double a_norm_sq;  // |A|^2 from power iteration

    DictionaryProgram(const ObservationSet& om, std::vector<double> values,
                      const Matrix& dict, double norm_sq)
        : omega(om), xv(std::move(values)), a(dict), at(dict.transpose()),
          a_norm_sq(norm_sq) {}

    std::size_t var_rows() const { return a.cols(); }
    std::size_t var_cols() const { return omega.cols(); }
    double step_scale() const { return a_norm_sq; }

    Matrix initial() const { return Matrix(a.cols(), omega.cols(), 0.0); }

    // y + (1/|A|^2) Aᵀ P_Omega(X - A y).
    Matrix prox_argument(const Matrix& y) const {
        Matrix arg = y;
        const std::size_t d = a.cols();
        std::size_t e = 0;
        for (const auto& ix : omega.indices()) {
            const double* ai = at.col(ix.i);
            const double* yj = y.col(ix.j);
            double pred = 0.0;
            for (std::size_t k = 0; k < d; ++k) pred += ai[k] * yj[k];
            const double w = (xv[e++] - pred) / a_norm_sq;
            double* gj = arg.col(ix.j);
            for (std::size_t k = 0; k < d; ++k) gj[k] += w * ai[k];
        }
        return arg;
    }

    double fit_norm(const Matrix& z) const {
        const std::size_t d = a.cols();
        double s = 0.0;
        std::size_t e = 0;
        for (const auto& ix : omega.indices()) {
            const double* ai = at.col(ix.i);
            const double* zj = z.col(ix.j);
            double pred = 0.0;
            for (std::size_t k = 0; k < d; ++k) pred += ai[k] * zj[k];
            const double r = xv[e++] - pred;
            s += r * r;
        }
        return std::sqrt(s);
    }

    Matrix reconstruction(const Matrix& z) const { return a * z; }
};

inline Matrix svt_from_factors(const ThinSvd& f, double tau, std::size_t rows,
                               std::size_t cols, double& nuclear_out) {
    nuclear_out = 0.0;
    std::size_t keep = 0;
    while (keep < f.rank() && f.sigma[keep] > tau) {
        nuclear_out += f.sigma[keep] - tau;
        ++keep;
    }
    if (keep == 0) return Matrix(rows, cols, 0.0);
    Matrix scaled(rows, keep);
    for (std::size_t k = 0; k < keep; ++k) {
        const double sk = f.sigma[k] - tau;
        const double* uk = f.u.col(k);
        double* c = scaled.col(k);
        for (std::size_t i = 0; i < rows; ++i) c[i] = uk[i] * sk;
    }
    Matrix vkeep(cols, keep);
    for (std::size_t k = 0; k < keep; ++k)
        std::copy_n(f.v.col(k), cols, vkeep.col(k));
    return scaled * vkeep.transpose();
}

// Proximal gradient with optional Nesterov momentum (function-value restart)
// and optional threshold continuation. The prox threshold starts at a
// fraction of the first prox argument's top singular value and decays
// toward its floor 1/(lambda |op|^2), advancing a stage only once progress
// at the current threshold stalls, so the iterate tracks the solution path
// instead of accumulating sub-threshold noise it would have to shave off at
// the floor. The convergence test only fires at the floor threshold.
//
// `warm_start`, when given, replaces the program's initial iterate and
// skips continuation (the caller asserts the start is already near the
// solution path, as in the lambda ladder of the constrained variants).
template <class Program>
SolverReport solve_composite(const Program& prog, const SolverConfig& cfg,
                             const Matrix* warm_start = nullptr) {
    cfg.validate();
    const double lambda = cfg.lambda;
    const double tau_floor = 1.0 / (lambda * prog.step_scale());
    constexpr double kContinuationStart = 0.5; // of sigma_1(first prox argument)
    constexpr double kContinuationDecay = 0.55;

    SolverReport rep;
    Matrix x = warm_start ? *warm_start : prog.initial();
    Matrix y = x;
    double t = 1.0;

    {
        const double fit0 = prog.fit_norm(x);
        const double nuc0 = norm(x, NormKind::Nuclear);
        rep.objective_trace.push_back(nuc0 + 0.5 * lambda * fit0 * fit0);
    }

    // a continuation stage is "done" when its per-step progress stalls
    const double stage_tol = std::max(1e-3, cfg.rel_tol);
    double tau = tau_floor;
    bool tau_initialized = !cfg.continuation || warm_start != nullptr;
    std::size_t quiet_steps = 0; // consecutive floor steps below rel_tol

    for (std::size_t k = 0; k < cfg.max_iters; ++k) {
        Matrix arg = prog.prox_argument(y);
        ThinSvd f = thin_svd(arg);
        if (!tau_initialized) {
            const double sigma1 = f.rank() ? f.sigma.front() : 0.0;
            tau = std::max(tau_floor, kContinuationStart * sigma1);
            tau_initialized = true;
        }
        double nuc = 0.0;
        Matrix xn = svt_from_factors(f, tau, prog.var_rows(), prog.var_cols(), nuc);
        double fit = prog.fit_norm(xn);
        double f_new = nuc + 0.5 * lambda * fit * fit;

        const bool at_floor = tau <= tau_floor;
        const double f_prev = rep.objective_trace.back();
        bool restarted = false;
        if (cfg.acceleration && at_floor &&
            f_new > f_prev + 1e-12 * std::max(1.0, std::abs(f_prev))) {
            // momentum overshoot: restart from the last accepted iterate. The
            // recomputed plain step can be arbitrarily short, so it never
            // counts toward the convergence test.
            restarted = true;
            t = 1.0;
            y = x;
            arg = prog.prox_argument(y);
            f = thin_svd(arg);
            xn = svt_from_factors(f, tau, prog.var_rows(), prog.var_cols(), nuc);
            fit = prog.fit_norm(xn);
            f_new = nuc + 0.5 * lambda * fit * fit;
        }

        const double denom = std::max(1.0, x.frobenius_norm());
        const double change = (xn - x).frobenius_norm() / denom;
        rep.objective_trace.push_back(f_new);
        ++rep.iterations;
        rep.terminal_relative_change = change;

        if (cfg.acceleration) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double beta = (t - 1.0) / t_next;
            y = xn;
            if (beta != 0.0) {
                Matrix momentum = xn - x;
                momentum *= beta;
                y += momentum;
            }
            t = t_next;
        } else {
            y = xn;
        }
        x = std::move(xn);

        if (at_floor) {
            // two consecutive quiet steps guard against one transient dip in
            // the (non-monotone) change sequence
            quiet_steps = (!restarted && change <= cfg.rel_tol) ? quiet_steps + 1 : 0;
            if (quiet_steps >= 2) {
                rep.converged = true;
                break;
            }
        } else if (change <= stage_tol) {
            tau = std::max(tau_floor, tau * kContinuationDecay);
        }
    }

    rep.fit_residual = prog.fit_norm(x);
    rep.reconstruction = prog.reconstruction(x);
    rep.solution = std::move(x);
    return rep;
}

} // namespace detail

// Nuclear-norm completion in Lagrangian form:
//   min_L |L|_* + (lambda/2) |P_Omega(X - L)|_F^2.
// Entries of x outside omega are never read.
inline SolverReport solve_cono(const Matrix& x, const ObservationSet& omega,
                               const SolverConfig& cfg = {}) {
    detail::IdentityProgram prog{omega, detail::observed_values(x, omega)};
    return detail::solve_composite(prog, cfg);
}

namespace detail {

// Row-space reduction decision for a dictionary: when rank(A) is well below
// the dictionary size, the iteration runs in the row space of A (Z = V_A W,
// an exact reparameterization: every iterate lies there since Z0 = 0 and
// updates live in span(Aᵀ), and svt(V_A W) = V_A svt(W)). `basis` is empty
// when no reduction applies.
struct DictionarySetup {
    Matrix effective; // the dictionary the iteration actually uses
    Matrix basis;     // V_A (dict_cols x rank) when reduced
    double norm_sq;
    bool reduced = false;
};

inline DictionarySetup make_dictionary_setup(const Matrix& a) {
    if (!a.is_finite())
        throw std::invalid_argument("solve_lrfd: dictionary has non-finite entries");
    DictionarySetup setup;
    setup.norm_sq = operator_norm_sq(a);
    if (setup.norm_sq == 0.0) throw std::invalid_argument("solve_lrfd: zero dictionary");
    const ThinSvd fa = thin_svd(a);
    if (fa.rank() * 2 <= a.cols()) {
        Matrix reduced(a.rows(), fa.rank()); // U_A Sigma_A = A V_A
        for (std::size_t kcol = 0; kcol < fa.rank(); ++kcol) {
            const double* uk = fa.u.col(kcol);
            double* ck = reduced.col(kcol);
            for (std::size_t i = 0; i < a.rows(); ++i) ck[i] = uk[i] * fa.sigma[kcol];
        }
        setup.effective = std::move(reduced);
        setup.basis = fa.v;
        setup.reduced = true;
    } else {
        setup.effective = a;
    }
    return setup;
}

} // namespace detail

// Dictionary-constrained completion in Lagrangian form:
//   min_Z |Z|_* + (lambda/2) |P_Omega(X - A Z)|_F^2,
// reconstruction A Z*.
inline SolverReport solve_lrfd(const Matrix& x, const Matrix& a,
                               const ObservationSet& omega,
                               const SolverConfig& cfg = {}) {
    if (a.rows() != x.rows())
        throw std::invalid_argument("solve_lrfd: dictionary row count mismatch");
    const detail::DictionarySetup setup = detail::make_dictionary_setup(a);
    detail::DictionaryProgram prog(omega, detail::observed_values(x, omega),
                                   setup.effective, setup.norm_sq);
    SolverReport rep = detail::solve_composite(prog, cfg);
    if (setup.reduced) rep.solution = setup.basis * rep.solution;
    return rep;
}

namespace detail {

// Lambda ladder for the constrained forms: each rung solves the Lagrangian
// program, warm-starting from the previous rung's solution (a cold start at
// large lambda cannot make progress: the prox threshold bounds every step
// by tau sqrt(rank), which is below any usable stopping tolerance).
template <class Program>
SolverReport solve_ladder(const Program& prog, const SolverConfig& base,
                          double epsilon) {
    SolverConfig cfg = base;
    SolverReport rep;
    Matrix warm;
    bool have_warm = false;
    for (double lambda = 100.0; lambda <= 1e9; lambda *= 10.0) {
        cfg.lambda = lambda;
        rep = solve_composite(prog, cfg, have_warm ? &warm : nullptr);
        if (rep.fit_residual <= epsilon) return rep;
        warm = rep.solution;
        have_warm = true;
    }
    rep.converged = false; // constraint unattainable at lambda = 1e9
    return rep;
}

inline SolverReport zero_feasible_report(std::size_t sol_rows, std::size_t rows,
                                         std::size_t cols, double observed_norm) {
    SolverReport rep;
    rep.solution = Matrix(sol_rows, cols, 0.0);
    rep.reconstruction = Matrix(rows, cols, 0.0);
    rep.objective_trace = {0.0};
    rep.terminal_relative_change = 0.0;
    rep.fit_residual = observed_norm;
    rep.converged = true;
    return rep;
}

} // namespace detail

// Constrained variants |P_Omega(X - .)|_F <= epsilon, realized by a
// lambda-continuation over the Lagrangian solves: lambda starts at 100 and
// is multiplied by 10 until the constraint holds or lambda reaches 1e9; the
// first feasible solution is returned.
inline SolverReport solve_cono_constrained(const Matrix& x, const ObservationSet& omega,
                                           double epsilon,
                                           const SolverConfig& base = {}) {
    if (epsilon < 0.0)
        throw std::invalid_argument("constrained solve: epsilon must be non-negative");
    detail::IdentityProgram prog{omega, detail::observed_values(x, omega)};
    double s = 0.0;
    for (double v : prog.xv) s += v * v;
    const double observed_norm = std::sqrt(s);
    if (observed_norm <= epsilon)
        return detail::zero_feasible_report(omega.rows(), omega.rows(), omega.cols(),
                                            observed_norm);
    return detail::solve_ladder(prog, base, epsilon);
}

inline SolverReport solve_lrfd_constrained(const Matrix& x, const Matrix& a,
                                           const ObservationSet& omega, double epsilon,
                                           const SolverConfig& base = {}) {
    if (epsilon < 0.0)
        throw std::invalid_argument("constrained solve: epsilon must be non-negative");
    if (a.rows() != x.rows())
        throw std::invalid_argument("solve_lrfd: dictionary row count mismatch");
    const detail::DictionarySetup setup = detail::make_dictionary_setup(a);
    detail::DictionaryProgram prog(omega, detail::observed_values(x, omega),
                                   setup.effective, setup.norm_sq);
    double s = 0.0;
    for (double v : prog.xv) s += v * v;
    const double observed_norm = std::sqrt(s);
    if (observed_norm <= epsilon)
        return detail::zero_feasible_report(a.cols(), omega.rows(), omega.cols(),
                                            observed_norm);
    SolverReport rep = detail::solve_ladder(prog, base, epsilon);
    if (setup.reduced) rep.solution = setup.basis * rep.solution;
    return rep;
}

} // namespace lrfd
