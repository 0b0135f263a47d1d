#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrfd/matrix.hpp"

namespace lrfd {

// Thin (skinny) SVD: only the r strictly-positive singular triplets are
// kept, r being the numerical rank under the cutoff
// sigma_i > max(rows, cols) * eps * sigma_1. A zero matrix yields r = 0
// with empty factors.
struct ThinSvd {
    Matrix u;                  // rows x r, orthonormal columns
    std::vector<double> sigma; // r values, positive, non-increasing
    Matrix v;                  // cols x r, orthonormal columns

    std::size_t rank() const { return sigma.size(); }

    Matrix reconstruct() const {
        if (sigma.empty())
            throw std::logic_error("ThinSvd::reconstruct: rank-0 factorization");
        Matrix scaled = u;
        for (std::size_t k = 0; k < sigma.size(); ++k) {
            double* c = scaled.col(k);
            for (std::size_t i = 0; i < scaled.rows(); ++i) c[i] *= sigma[k];
        }
        return scaled * v.transpose();
    }
};

// Raised when the implicit-shift QR iteration fails to drive the
// superdiagonal to zero within the iteration cap.
class SvdError : public std::runtime_error {
public:
    SvdError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

namespace detail {

// Golub-Kahan bidiagonalization followed by implicit-shift QR on the
// bidiagonal, following the LINPACK/JAMA organization. Requires m >= n;
// produces thin U (m x n), singular values s (n, non-negative,
// non-increasing) and V (n x n).
inline void golub_kahan_svd(Matrix a, Matrix& u_out, std::vector<double>& s_out,
                            Matrix& v_out) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());

    std::vector<double> s(n, 0.0);
    std::vector<double> e(n, 0.0);
    std::vector<double> work(m, 0.0);
    Matrix u(m, n, 0.0);
    Matrix v(n, n, 0.0);

    auto segment_norm = [](const double* x, int lo, int hi) {
        double t = 0.0;
        for (int i = lo; i < hi; ++i) t = std::hypot(t, x[i]);
        return t;
    };

    // Reduce a to bidiagonal form, diagonal in s, superdiagonal in e.
    const int nct = std::min(m - 1, n);
    const int nrt = std::max(0, std::min(n - 2, m));
    for (int k = 0; k < std::max(nct, nrt); ++k) {
        double* ak = a.col(k);
        if (k < nct) {
            s[k] = segment_norm(ak, k, m);
            if (s[k] != 0.0) {
                if (ak[k] < 0.0) s[k] = -s[k];
                for (int i = k; i < m; ++i) ak[i] /= s[k];
                ak[k] += 1.0;
            }
            s[k] = -s[k];
        }
        for (int j = k + 1; j < n; ++j) {
            double* aj = a.col(j);
            if (k < nct && s[k] != 0.0) {
                double t = 0.0;
                for (int i = k; i < m; ++i) t += ak[i] * aj[i];
                t = -t / ak[k];
                for (int i = k; i < m; ++i) aj[i] += t * ak[i];
            }
            e[j] = aj[k];
        }
        if (k < nct) {
            double* uk = u.col(k);
            for (int i = k; i < m; ++i) uk[i] = ak[i];
        }
        if (k < nrt) {
            e[k] = segment_norm(e.data(), k + 1, n);
            if (e[k] != 0.0) {
                if (e[k + 1] < 0.0) e[k] = -e[k];
                for (int i = k + 1; i < n; ++i) e[i] /= e[k];
                e[k + 1] += 1.0;
            }
            e[k] = -e[k];
            if (k + 1 < m && e[k] != 0.0) {
                for (int i = k + 1; i < m; ++i) work[i] = 0.0;
                for (int j = k + 1; j < n; ++j) {
                    const double* aj = a.col(j);
                    const double ej = e[j];
                    for (int i = k + 1; i < m; ++i) work[i] += ej * aj[i];
                }
                for (int j = k + 1; j < n; ++j) {
                    double* aj = a.col(j);
                    const double t = -e[j] / e[k + 1];
                    for (int i = k + 1; i < m; ++i) aj[i] += t * work[i];
                }
            }
            double* vk = v.col(k);
            for (int i = k + 1; i < n; ++i) vk[i] = e[i];
        }
    }

    // Final bidiagonal of order p.
    int p = n; // m >= n
    if (nct < n) s[nct] = a(nct, nct);
    if (nrt + 1 < p) e[nrt] = a(nrt, p - 1);
    e[p - 1] = 0.0;

    // Back-accumulate U.
    for (int j = nct; j < n; ++j) {
        double* uj = u.col(j);
        for (int i = 0; i < m; ++i) uj[i] = 0.0;
        uj[j] = 1.0;
    }
    for (int k = nct - 1; k >= 0; --k) {
        double* uk = u.col(k);
        if (s[k] != 0.0) {
            for (int j = k + 1; j < n; ++j) {
                double* uj = u.col(j);
                double t = 0.0;
                for (int i = k; i < m; ++i) t += uk[i] * uj[i];
                t = -t / uk[k];
                for (int i = k; i < m; ++i) uj[i] += t * uk[i];
            }
            for (int i = k; i < m; ++i) uk[i] = -uk[i];
            uk[k] += 1.0;
            for (int i = 0; i < k - 1; ++i) uk[i] = 0.0;
        } else {
            for (int i = 0; i < m; ++i) uk[i] = 0.0;
            uk[k] = 1.0;
        }
    }

    // Back-accumulate V.
    for (int k = n - 1; k >= 0; --k) {
        double* vk = v.col(k);
        if (k < nrt && e[k] != 0.0) {
            for (int j = k + 1; j < n; ++j) {
                double* vj = v.col(j);
                double t = 0.0;
                for (int i = k + 1; i < n; ++i) t += vk[i] * vj[i];
                t = -t / vk[k + 1];
                for (int i = k + 1; i < n; ++i) vj[i] += t * vk[i];
            }
        }
        for (int i = 0; i < n; ++i) vk[i] = 0.0;
        vk[k] = 1.0;
    }

    // Implicit-shift QR on the bidiagonal.
    const int pp_total = p;
    const long iter_cap = 100L * std::min(m, n);
    long iter = 0;
    const double eps = std::numeric_limits<double>::epsilon();
    const double tiny = std::numeric_limits<double>::min();
    while (p > 0) {
        if (iter > iter_cap) {
            double smax = tiny;
            for (int i = 0; i < pp_total; ++i) smax = std::max(smax, std::abs(s[i]));
            double emax = 0.0;
            for (int i = 0; i + 1 < pp_total; ++i) emax = std::max(emax, std::abs(e[i]));
            throw SvdError("thin_svd: QR iteration did not converge within " +
                               std::to_string(iter_cap) + " sweeps",
                           emax / smax);
        }
        int k, kase;

        // kase = 1: s(p-1) negligible           -> deflate
        // kase = 2: s(k) negligible, k < p      -> split
        // kase = 3: e(k-1) negligible, QR step
        // kase = 4: e(p-2) negligible           -> converged block
        for (k = p - 2; k >= -1; --k) {
            if (k == -1) break;
            if (std::abs(e[k]) <= tiny + eps * (std::abs(s[k]) + std::abs(s[k + 1]))) {
                e[k] = 0.0;
                break;
            }
        }
        if (k == p - 2) {
            kase = 4;
        } else {
            int ks;
            for (ks = p - 1; ks >= k; --ks) {
                if (ks == k) break;
                const double t = (ks != p ? std::abs(e[ks]) : 0.0) +
                                 (ks != k + 1 ? std::abs(e[ks - 1]) : 0.0);
                if (std::abs(s[ks]) <= tiny + eps * t) {
                    s[ks] = 0.0;
                    break;
                }
            }
            if (ks == k) {
                kase = 3;
            } else if (ks == p - 1) {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        ++k;

        switch (kase) {
        case 1: { // zero s(p-1), chase e(p-2) away
            double f = e[p - 2];
            e[p - 2] = 0.0;
            for (int j = p - 2; j >= k; --j) {
                double t = std::hypot(s[j], f);
                const double cs = s[j] / t;
                const double sn = f / t;
                s[j] = t;
                if (j != k) {
                    f = -sn * e[j - 1];
                    e[j - 1] = cs * e[j - 1];
                }
                double* vj = v.col(j);
                double* vp = v.col(p - 1);
                for (int i = 0; i < n; ++i) {
                    t = cs * vj[i] + sn * vp[i];
                    vp[i] = -sn * vj[i] + cs * vp[i];
                    vj[i] = t;
                }
            }
            break;
        }
        case 2: { // zero s(k-1), chase e(k-1) down
            double f = e[k - 1];
            e[k - 1] = 0.0;
            for (int j = k; j < p; ++j) {
                double t = std::hypot(s[j], f);
                const double cs = s[j] / t;
                const double sn = f / t;
                s[j] = t;
                f = -sn * e[j];
                e[j] = cs * e[j];
                double* uj = u.col(j);
                double* uk1 = u.col(k - 1);
                for (int i = 0; i < m; ++i) {
                    t = cs * uj[i] + sn * uk1[i];
                    uk1[i] = -sn * uj[i] + cs * uk1[i];
                    uj[i] = t;
                }
            }
            break;
        }
        case 3: { // one implicit-shift QR step
            const double scale = std::max({std::abs(s[p - 1]), std::abs(s[p - 2]),
                                           std::abs(e[p - 2]), std::abs(s[k]),
                                           std::abs(e[k])});
            const double sp = s[p - 1] / scale;
            const double spm1 = s[p - 2] / scale;
            const double epm1 = e[p - 2] / scale;
            const double sk = s[k] / scale;
            const double ek = e[k] / scale;
            const double b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
            const double c = (sp * epm1) * (sp * epm1);
            double shift = 0.0;
            if (b != 0.0 || c != 0.0) {
                shift = std::sqrt(b * b + c);
                if (b < 0.0) shift = -shift;
                shift = c / (b + shift);
            }
            double f = (sk + sp) * (sk - sp) + shift;
            double g = sk * ek;

            for (int j = k; j < p - 1; ++j) {
                double t = std::hypot(f, g);
                double cs = f / t;
                double sn = g / t;
                if (j != k) e[j - 1] = t;
                f = cs * s[j] + sn * e[j];
                e[j] = cs * e[j] - sn * s[j];
                g = sn * s[j + 1];
                s[j + 1] = cs * s[j + 1];
                {
                    double* vj = v.col(j);
                    double* vj1 = v.col(j + 1);
                    for (int i = 0; i < n; ++i) {
                        t = cs * vj[i] + sn * vj1[i];
                        vj1[i] = -sn * vj[i] + cs * vj1[i];
                        vj[i] = t;
                    }
                }
                t = std::hypot(f, g);
                cs = f / t;
                sn = g / t;
                s[j] = t;
                f = cs * e[j] + sn * s[j + 1];
                s[j + 1] = -sn * e[j] + cs * s[j + 1];
                g = sn * e[j + 1];
                e[j + 1] = cs * e[j + 1];
                if (j < m - 1) {
                    double* uj = u.col(j);
                    double* uj1 = u.col(j + 1);
                    for (int i = 0; i < m; ++i) {
                        t = cs * uj[i] + sn * uj1[i];
                        uj1[i] = -sn * uj[i] + cs * uj1[i];
                        uj[i] = t;
                    }
                }
            }
            e[p - 2] = f;
            ++iter;
            break;
        }
        case 4: { // convergence of the trailing value
            if (s[k] <= 0.0) {
                s[k] = -s[k];
                double* vk = v.col(k);
                for (int i = 0; i < n; ++i) vk[i] = -vk[i];
            }
            // Bubble into non-increasing order.
            while (k < pp_total - 1) {
                if (s[k] >= s[k + 1]) break;
                std::swap(s[k], s[k + 1]);
                if (k < n - 1) {
                    double* vk = v.col(k);
                    double* vk1 = v.col(k + 1);
                    for (int i = 0; i < n; ++i) std::swap(vk[i], vk1[i]);
                }
                if (k < m - 1) {
                    double* uk = u.col(k);
                    double* uk1 = u.col(k + 1);
                    for (int i = 0; i < m; ++i) std::swap(uk[i], uk1[i]);
                }
                ++k;
            }
            --p;
            break;
        }
        }
    }

    u_out = std::move(u);
    s_out = std::move(s);
    v_out = std::move(v);
}

} // namespace detail

inline ThinSvd thin_svd(const Matrix& m) {
    if (m.empty())
        throw std::invalid_argument("thin_svd: empty matrix");
    if (!m.is_finite())
        throw std::invalid_argument("thin_svd: matrix has non-finite entries");

    Matrix u, v;
    std::vector<double> s;
    const bool transposed = m.rows() < m.cols();
    if (transposed)
        detail::golub_kahan_svd(m.transpose(), v, s, u);
    else
        detail::golub_kahan_svd(m, u, s, v);

    // Numerical rank: treat sigma_i <= max(rows, cols) * eps * sigma_1 as zero.
    const double cutoff = static_cast<double>(std::max(m.rows(), m.cols())) *
                          std::numeric_limits<double>::epsilon() *
                          (s.empty() ? 0.0 : s.front());
    std::size_t r = 0;
    while (r < s.size() && s[r] > cutoff && s[r] > 0.0) ++r;

    ThinSvd out;
    out.sigma.assign(s.begin(), s.begin() + r);
    if (r > 0) {
        Matrix ur(m.rows(), r);
        Matrix vr(m.cols(), r);
        for (std::size_t k = 0; k < r; ++k) {
            std::copy_n(u.col(k), m.rows(), ur.col(k));
            std::copy_n(v.col(k), m.cols(), vr.col(k));
        }
        out.u = std::move(ur);
        out.v = std::move(vr);
    }
    return out;
}

} // namespace lrfd
