#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <span>

namespace relunet {

// Accumulates doubles without intermediate rounding (Shewchuk's
// nonoverlapping partials) and returns the correctly rounded total.
// The result depends only on the multiset of addends, never on their order.
// Addends must be finite and the running total must not overflow.
class ExactSum {
 public:
  void add(double x) noexcept {
    std::size_t kept = 0;
    for (std::size_t j = 0; j < count_; ++j) {
      double y = partials_[j];
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[kept++] = lo;
      x = hi;
    }
    count_ = kept;
    if (x != 0.0 && count_ < kMaxPartials) partials_[count_++] = x;
  }
  void merge(const ExactSum& other) noexcept;
  double value() const noexcept;
  void clear() noexcept { count_ = 0; }

 private:
  // A double's exponent range bounds the number of nonoverlapping partials.
  static constexpr std::size_t kMaxPartials = 48;
  std::array<double, kMaxPartials> partials_{};
  std::size_t count_ = 0;
};

double exact_sum(std::span<const double> values) noexcept;

// Correctly rounded sum_i a[i] * b[i] where each product is rounded first.
double exact_dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace relunet
