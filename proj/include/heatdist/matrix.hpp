#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "heatdist/error.hpp"

namespace heatdist {

using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    Vector column(std::size_t j) const {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense symmetric matrix. Writes go through set(), which mirrors the entry,
/// so entries(i, j) == entries(j, i) holds bit for bit.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : dense_(n, n) {}

    static SymMatrix identity(std::size_t n) {
        SymMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
        return m;
    }

    /// Builds from the upper triangle of a square matrix; the lower triangle is ignored.
    static SymMatrix from_upper(const Matrix& m) {
        if (m.rows() != m.cols()) throw DimensionMismatch("SymMatrix::from_upper", m.rows(), m.cols());
        SymMatrix s(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = i; j < m.cols(); ++j) s.set(i, j, m(i, j));
        return s;
    }

    std::size_t size() const noexcept { return dense_.rows(); }

    double operator()(std::size_t i, std::size_t j) const { return dense_(i, j); }

    void set(std::size_t i, std::size_t j, double v) {
        dense_(i, j) = v;
        dense_(j, i) = v;
    }
    void add(std::size_t i, std::size_t j, double v) {
        dense_(i, j) += v;
        if (i != j) dense_(j, i) = dense_(i, j);
    }

    std::span<const double> row(std::size_t i) const { return dense_.row(i); }
    const Matrix& dense() const noexcept { return dense_; }

    double max_abs() const {
        double m = 0.0;
        for (double x : dense_.data()) m = std::max(m, std::abs(x));
        return m;
    }
    double frobenius() const {
        double s = 0.0;
        for (double x : dense_.data()) s += x * x;
        return std::sqrt(s);
    }

    friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
    Matrix dense_;
};

inline SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    if (a.size() != b.size()) throw DimensionMismatch("SymMatrix difference", a.size(), b.size());
    SymMatrix r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i; j < a.size(); ++j) r.set(i, j, a(i, j) - b(i, j));
    return r;
}

inline Vector multiply(const Matrix& m, std::span<const double> v) {
    if (m.cols() != v.size()) throw DimensionMismatch("matrix-vector product", m.cols(), v.size());
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        const auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * v[j];
        out[i] = acc;
    }
    return out;
}

inline Vector multiply(const SymMatrix& m, std::span<const double> v) { return multiply(m.dense(), v); }

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matrix product", a.cols(), b.rows());
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector difference", a.size(), b.size());
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

inline double sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace heatdist
