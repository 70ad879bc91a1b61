#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace relunet {

using Vector = std::vector<double>;

// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  // Number of entries that are not exactly 0.0.
  std::size_t nonzeros() const noexcept;
  double max_abs() const noexcept;

  Matrix transpose() const;
  Matrix operator-() const;
  Matrix scaled(double a) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products and sums use correctly rounded accumulation, so every entry is
// independent of summation order.
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);

// [a; b] and [a, b].
Matrix vstack(const Matrix& top, const Matrix& bottom);
Matrix hstack(const Matrix& left, const Matrix& right);
Matrix block_diag(const std::vector<const Matrix*>& blocks);

std::size_t nonzeros(std::span<const double> v) noexcept;
double max_abs(std::span<const double> v) noexcept;

}  // namespace relunet
