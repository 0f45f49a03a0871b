#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace tart {

// Dense row-major matrix of doubles. Deliberately minimal: the inference
// fast path never builds large matrices, so a small value type is enough.
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols, double fill = 0.0) {
        if (rows < 0 || cols < 0) {
            throw std::invalid_argument("Matrix: negative dimension");
        }
        rows_ = rows;
        cols_ = cols;
        data_.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) {
        return data_[static_cast<size_t>(r) * cols_ + c];
    }
    double operator()(int r, int c) const {
        return data_[static_cast<size_t>(r) * cols_ + c];
    }

    std::span<double> row(int r) {
        return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
    }
    std::span<const double> row(int r) const {
        return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
    }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y = A x
inline void matvec_into(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (static_cast<int>(x.size()) != a.cols() || static_cast<int>(y.size()) != a.rows()) {
        throw std::invalid_argument("matvec: dimension mismatch");
    }
    for (int r = 0; r < a.rows(); ++r) {
        y[r] = dot(a.row(r), x);
    }
}

inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    std::vector<double> y(static_cast<size_t>(a.rows()));
    matvec_into(a, x, y);
    return y;
}

} // namespace tart
