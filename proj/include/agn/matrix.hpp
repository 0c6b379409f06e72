#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agn {

/// Dense row-major matrix of doubles. Rows are exposed as spans so callers
/// can treat each row as a weight vector without copying.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Frobenius inner product; shapes must agree.
inline double frobenius_dot(const Matrix& a, const Matrix& b) { return dot(a.flat(), b.flat()); }

inline double frobenius_norm_sq(const Matrix& a) { return dot(a.flat(), a.flat()); }

}  // namespace agn
