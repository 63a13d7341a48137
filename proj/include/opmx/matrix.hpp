#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "opmx/errors.hpp"
#include "opmx/scalar.hpp"

namespace opmx {

/// Dense row-major matrix of exact scalars; used for compressions P_N A P_N.
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Scalar& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  ExactMatrix transpose() const {
    ExactMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Copies `block` into this matrix with its top-left corner at (r0, c0).
  void place(const ExactMatrix& block, std::size_t r0, std::size_t c0) {
    if (r0 + block.rows_ > rows_ || c0 + block.cols_ > cols_)
      throw Error(ErrorKind::ShapeMismatch, "block does not fit");
    for (std::size_t i = 0; i < block.rows_; ++i)
      for (std::size_t j = 0; j < block.cols_; ++j) (*this)(r0 + i, c0 + j) = block(i, j);
  }

  bool is_zero() const {
    for (const auto& x : data_)
      if (x != 0) return false;
    return true;
  }

  friend ExactMatrix operator+(const ExactMatrix& a, const ExactMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorKind::ShapeMismatch, "matrix sum");
    ExactMatrix out(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) out.data_[i] = a.data_[i] + b.data_[i];
    return out;
  }
  friend ExactMatrix operator-(const ExactMatrix& a) {
    ExactMatrix out(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) out.data_[i] = -a.data_[i];
    return out;
  }
  friend std::vector<Scalar> operator*(const ExactMatrix& a, const std::vector<Scalar>& x) {
    if (x.size() != a.cols_) throw Error(ErrorKind::ShapeMismatch, "matrix-vector product");
    std::vector<Scalar> y(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j)
        if (a(i, j) != 0) y[i] += a(i, j) * x[j];
    return y;
  }
  friend bool operator==(const ExactMatrix& a, const ExactMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  /// First (row, col) where the two matrices differ, for diagnostics.
  static std::string first_difference(const ExactMatrix& a, const ExactMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return "shape";
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j)
        if (a(i, j) != b(i, j))
          return "(" + std::to_string(i) + "," + std::to_string(j) + "): " + a(i, j).str() + " vs " + b(i, j).str();
    return "";
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Scalar> data_;
};

}  // namespace opmx
