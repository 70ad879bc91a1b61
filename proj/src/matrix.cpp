#include "relunet/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "relunet/error.hpp"
#include "relunet/exact_sum.hpp"

namespace relunet {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows, std::size_t cols) {
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                      " entries, expected " + std::to_string(cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + r * cols);
  }
  return m;
}

std::size_t Matrix::nonzeros() const noexcept { return relunet::nonzeros(data_); }

double Matrix::max_abs() const noexcept { return relunet::max_abs(data_); }

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::operator-() const { return scaled(-1.0); }

Matrix Matrix::scaled(double a) const {
  Matrix s = *this;
  for (double& v : s.data_) v *= a;
  return s;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  std::vector<ExactSum> acc(b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (auto& s : acc) s.clear();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double av = a(r, k);
      if (av == 0.0) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) {
        const double bv = b(k, c);
        if (bv != 0.0) acc[c].add(av * bv);
      }
    }
    for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) = acc[c].value();
  }
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "matvec: width mismatch");
  }
  Vector y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = exact_dot(a.row(r), x);
  return y;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "vstack: column counts differ");
  }
  Matrix out(top.rows() + bottom.rows(), top.cols());
  for (std::size_t r = 0; r < top.rows(); ++r)
    for (std::size_t c = 0; c < top.cols(); ++c) out(r, c) = top(r, c);
  for (std::size_t r = 0; r < bottom.rows(); ++r)
    for (std::size_t c = 0; c < bottom.cols(); ++c) out(top.rows() + r, c) = bottom(r, c);
  return out;
}

Matrix hstack(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "hstack: row counts differ");
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    for (std::size_t c = 0; c < left.cols(); ++c) out(r, c) = left(r, c);
    for (std::size_t c = 0; c < right.cols(); ++c) out(r, left.cols() + c) = right(r, c);
  }
  return out;
}

Matrix block_diag(const std::vector<const Matrix*>& blocks) {
  std::size_t rows = 0, cols = 0;
  for (const Matrix* b : blocks) {
    rows += b->rows();
    cols += b->cols();
  }
  Matrix out(rows, cols);
  std::size_t r0 = 0, c0 = 0;
  for (const Matrix* b : blocks) {
    for (std::size_t r = 0; r < b->rows(); ++r)
      for (std::size_t c = 0; c < b->cols(); ++c) out(r0 + r, c0 + c) = (*b)(r, c);
    r0 += b->rows();
    c0 += b->cols();
  }
  return out;
}

std::size_t nonzeros(std::span<const double> v) noexcept {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
}

double max_abs(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace relunet
