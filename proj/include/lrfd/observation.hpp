#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lrfd/matrix.hpp"
#include "lrfd/rng.hpp"

namespace lrfd {

// Every entry observed independently with probability rho.
struct BernoulliRho {
    double rho;
};

// Exactly k entries observed, uniform over all size-k subsets.
struct UniformExactCount {
    std::size_t count;
};

using SamplingModel = std::variant<BernoulliRho, UniformExactCount>;

// Index set of observed entries plus the sampling metadata that produced
// it. Indices are 0-based, sorted row-major, duplicate-free.
class ObservationSet {
public:
    struct Index {
        std::uint32_t i;
        std::uint32_t j;
        friend bool operator==(Index a, Index b) { return a.i == b.i && a.j == b.j; }
        friend bool operator<(Index a, Index b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        }
    };

    ObservationSet(std::size_t rows, std::size_t cols, std::vector<Index> indices,
                   SamplingModel model = UniformExactCount{0}, std::uint64_t seed = 0)
        : rows_(rows), cols_(cols), indices_(std::move(indices)), model_(model),
          seed_(seed) {
        if (rows_ == 0 || cols_ == 0)
            throw std::invalid_argument("ObservationSet: dimensions must be positive");
        std::sort(indices_.begin(), indices_.end());
        indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
        for (const Index& ix : indices_)
            if (ix.i >= rows_ || ix.j >= cols_)
                throw std::invalid_argument("ObservationSet: index out of range");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t count() const { return indices_.size(); }
    double fraction() const {
        return static_cast<double>(indices_.size()) /
               (static_cast<double>(rows_) * static_cast<double>(cols_));
    }
    const std::vector<Index>& indices() const { return indices_; }
    const SamplingModel& model() const { return model_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Index> indices_;
    SamplingModel model_;
    std::uint64_t seed_;
};

inline ObservationSet sample_observations(std::size_t rows, std::size_t cols,
                                          const SamplingModel& model,
                                          std::uint64_t seed) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("sample_observations: dimensions must be positive");
    const std::size_t total = rows * cols;
    std::vector<ObservationSet::Index> ix;
    Rng rng(seed);

    if (const auto* b = std::get_if<BernoulliRho>(&model)) {
        if (!(b->rho > 0.0) || b->rho > 1.0)
            throw std::invalid_argument("sample_observations: rho must lie in (0, 1]");
        for (std::uint32_t i = 0; i < rows; ++i)
            for (std::uint32_t j = 0; j < cols; ++j)
                if (rng.next_double() < b->rho) ix.push_back({i, j});
    } else {
        const auto& u = std::get<UniformExactCount>(model);
        if (u.count == 0 || u.count > total)
            throw std::invalid_argument("sample_observations: count out of range");
        // Partial Fisher-Yates over linear indices, then sort row-major.
        std::vector<std::uint32_t> linear(total);
        for (std::uint32_t k = 0; k < total; ++k) linear[k] = k;
        for (std::size_t k = 0; k < u.count; ++k) {
            const std::size_t pick = k + rng.next_below(total - k);
            std::swap(linear[k], linear[pick]);
        }
        ix.reserve(u.count);
        for (std::size_t k = 0; k < u.count; ++k) {
            const std::uint32_t lin = linear[k];
            ix.push_back({lin / static_cast<std::uint32_t>(cols),
                          lin % static_cast<std::uint32_t>(cols)});
        }
    }
    return ObservationSet(rows, cols, std::move(ix), model, seed);
}

inline void require_shape(const Matrix& m, const ObservationSet& omega,
                          const char* who) {
    if (m.rows() != omega.rows() || m.cols() != omega.cols())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// P_Omega: keep observed entries, zero the rest.
inline Matrix project_omega(const Matrix& m, const ObservationSet& omega) {
    require_shape(m, omega, "project_omega");
    Matrix out(m.rows(), m.cols(), 0.0);
    for (const auto& ix : omega.indices()) out(ix.i, ix.j) = m(ix.i, ix.j);
    return out;
}

// P_Omega-perp: zero observed entries, keep the rest.
inline Matrix project_omega_complement(const Matrix& m, const ObservationSet& omega) {
    require_shape(m, omega, "project_omega_complement");
    Matrix out = m;
    for (const auto& ix : omega.indices()) out(ix.i, ix.j) = 0.0;
    return out;
}

// Orthonormal basis of a column subspace, U with UᵀU = I.
class SubspaceBasis {
public:
    explicit SubspaceBasis(Matrix basis) : basis_(std::move(basis)) {
        const Matrix gram = transpose_times(basis_, basis_);
        for (std::size_t i = 0; i < gram.rows(); ++i)
            for (std::size_t j = 0; j < gram.cols(); ++j) {
                const double want = i == j ? 1.0 : 0.0;
                if (std::abs(gram(i, j) - want) > 1e-10)
                    throw std::invalid_argument(
                        "SubspaceBasis: columns are not orthonormal");
            }
    }

    const Matrix& matrix() const { return basis_; }
    std::size_t ambient_dim() const { return basis_.rows(); }
    std::size_t rank() const { return basis_.cols(); }

private:
    Matrix basis_;
};

// P_U(M) = U Uᵀ M.
inline Matrix project_column_space(const Matrix& m, const SubspaceBasis& u) {
    if (m.rows() != u.ambient_dim())
        throw std::invalid_argument("project_column_space: dimension mismatch");
    return u.matrix() * transpose_times(u.matrix(), m);
}

} // namespace lrfd
