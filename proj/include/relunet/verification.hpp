#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "relunet/constructors.hpp"
#include "relunet/data.hpp"
#include "relunet/fnn.hpp"

namespace relunet {

struct ErrorReport {
  double sup_error = 0.0;  // max over samples and probes of the max-norm deviation
  double mse = 0.0;        // mean over random samples of (1/N_K) sum_j e_j^2
  std::optional<double> grad_sup_error;
  std::size_t sample_count = 0;
  std::size_t probe_count = 0;
  std::size_t skipped_count = 0;  // Sobolev samples abandoned near kinks
  std::uint64_t seed = 0;
  double domain_half_width = 0.0;

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

struct SamplingOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  // Include the deterministic zero, axis and corner probes.
  bool probes = true;
};

// Uniform (W, x) in [-D, D]^{mn + n} against the exact product W x.
ErrorReport sup_error_matvec(const Fnn& f, std::size_t m, std::size_t n, double D,
                             const SamplingOptions& opts);

// Uniform [vec(W1), vec(W2), x1, x2] in [-D, D] against the complex product.
ErrorReport sup_error_complex(const Fnn& f, std::size_t m, std::size_t n, double D,
                              const SamplingOptions& opts);

// Points are redrawn while any hidden pre-activation is closer than this to
// a kink, at most kMaxResample times.
inline constexpr double kKinkMargin = 1e-9;
inline constexpr int kMaxResample = 100;

// Value deviation in sup_error and Jacobian deviation (max absolute entry
// against the exact derivative of W x) in grad_sup_error.
ErrorReport sobolev_error_matvec(const Fnn& f, std::size_t m, std::size_t n, double D,
                                 const SamplingOptions& opts);

// Uniform x in [-D, D]^n against the exact product W x; with `sobolev` the
// Jacobian is compared against W as well.
ErrorReport error_affine(const Fnn& f, const Matrix& W, double D, const SamplingOptions& opts,
                         bool sobolev = false);

struct SquareDerivativeReport {
  double max_abs_derivative = 0.0;  // max |f'(t)| over samples in (0, 1)
  double max_derivative_error = 0.0;  // max |f'(t) - 2t|
  double sup_error = 0.0;             // max |f(t) - t^2|
  double mse = 0.0;
  std::size_t sample_count = 0;
  std::size_t skipped_count = 0;
};

SquareDerivativeReport square_derivative_check(const Fnn& f, const SamplingOptions& opts);

struct CurvePoint {
  int order = 0;
  double sup_error = 0.0;
  double mse = 0.0;
};

// |f_s(t) - t^2| over the 2^14 + 1 point grid of [0, 1], s = 0..max_order.
std::vector<CurvePoint> square_error_curve(int max_order);
inline constexpr std::size_t kCurveGridPoints = (1u << 14) + 1;

// Sup and MSE of f over a dataset.
ErrorReport error_on_dataset(const Fnn& f, const Dataset& ds, unsigned jobs = 1);
double mse_on_dataset(const Fnn& f, const Dataset& ds, unsigned jobs = 1);

struct BudgetCompliance {
  NetworkMetrics actual;
  BoundBudget budget;
  bool depth_ok = false;
  bool width_ok = false;
  bool weight_ok = false;
  std::optional<bool> connectivity_ok;
  std::optional<bool> neurons_ok;

  bool ok() const noexcept {
    return depth_ok && width_ok && weight_ok && connectivity_ok.value_or(true) &&
           neurons_ok.value_or(true);
  }
};

// Depth passes when L <= ceil(depth_bound), since a layer count can only
// meet a fractional bound by rounding it up.
BudgetCompliance check_budget(const Fnn& f, const BoundBudget& budget);

}  // namespace relunet
