#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lrfd/rng.hpp"

namespace lrfd {

// Dense real matrix in column-major layout, double precision. The one
// carrier type of the library: data matrices, dictionaries, bases and
// solver iterates are all Matrix values. Entries are expected to stay
// finite; public entry points that consume a Matrix validate this once
// via is_finite().
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
        if (data_.size() != rows * cols)
            throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
        Matrix m(rows, cols);
        for (double& x : m.data_) x = rng.next_gaussian();
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[j * rows_ + i];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[j * rows_ + i];
    }

    double* col(std::size_t j) { return data_.data() + j * rows_; }
    const double* col(std::size_t j) const { return data_.data() + j * rows_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool is_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t j = 0; j < cols_; ++j)
            for (std::size_t i = 0; i < rows_; ++i)
                t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : data_) s += x * x;
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (double x : data_) s = std::max(s, std::abs(x));
        return s;
    }

    Matrix& operator+=(const Matrix& other) {
        require_same_shape(other);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& other) {
        require_same_shape(other);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& x : data_) x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    // C = A * B, column-major friendly loop order (per-column axpy).
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_)
            throw std::invalid_argument("Matrix multiply: inner dimensions differ");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t j = 0; j < b.cols_; ++j) {
            double* cj = c.col(j);
            const double* bj = b.col(j);
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double bkj = bj[k];
                if (bkj == 0.0) continue;
                const double* ak = a.col(k);
                for (std::size_t i = 0; i < a.rows_; ++i) cj[i] += ak[i] * bkj;
            }
        }
        return c;
    }

private:
    void require_same_shape(const Matrix& other) const {
        if (!same_shape(other))
            throw std::invalid_argument("Matrix: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// AᵀB without forming the transpose.
inline Matrix transpose_times(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("transpose_times: row counts differ");
    Matrix c(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j);
        double* cj = c.col(j);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double* ak = a.col(k);
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) s += ak[i] * bj[i];
            cj[k] = s;
        }
    }
    return c;
}

inline double dot(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("dot: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a.data()[k] * b.data()[k];
    return s;
}

} // namespace lrfd
