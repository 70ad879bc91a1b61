#include "relunet/exact_sum.hpp"

#include <cmath>

namespace relunet {

void ExactSum::merge(const ExactSum& other) noexcept {
  for (std::size_t j = 0; j < other.count_; ++j) add(other.partials_[j]);
}

double ExactSum::value() const noexcept {
  if (count_ == 0) return 0.0;
  std::size_t n = count_;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  // Round-half-even across partials: if the discarded tail pushes the
  // remainder past the halfway point, nudge hi by one ulp.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

double exact_sum(std::span<const double> values) noexcept {
  ExactSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double exact_dot(std::span<const double> a, std::span<const double> b) noexcept {
  ExactSum acc;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

}  // namespace relunet
