#include "relunet/verification.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "relunet/exact_sum.hpp"
#include "relunet/rng.hpp"

namespace relunet {

namespace {

constexpr std::size_t kChunk = 1024;
constexpr std::size_t kProbeCount = 64;

constexpr std::uint32_t kSampleStream = 0;  // attempts use streams 0..99
constexpr std::uint32_t kProbeStream = 1000;
constexpr std::uint32_t kCornerStream = 1001;

struct ChunkResult {
  double sup = 0.0;
  double grad = 0.0;
  ExactSum squares;
  std::size_t skipped = 0;
};

unsigned worker_count(unsigned jobs, std::size_t chunks) {
  unsigned j = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
  return static_cast<unsigned>(std::min<std::size_t>(j, std::max<std::size_t>(chunks, 1)));
}

// Runs body(chunk_index, result) for every chunk on `jobs` workers. Chunk
// results are stored by index, so the final reduction never depends on
// scheduling.
template <class Body>
std::vector<ChunkResult> for_chunks(std::size_t total, unsigned jobs, Body body) {
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) body(c, results[c]);
  };
  const unsigned workers = worker_count(jobs, chunks);
  if (workers <= 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

// Max-norm deviation; adds (1/N_K) sum_j e_j^2 to `squares`.
double deviation(std::span<const double> y, std::span<const double> t, ExactSum& squares) {
  double sup = 0.0;
  ExactSum s;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double e = y[j] - t[j];
    sup = std::max(sup, std::fabs(e));
    s.add(e * e);
  }
  squares.add(s.value() / static_cast<double>(y.size()));
  return sup;
}

void require_width(const Fnn& f, std::size_t in, std::size_t out) {
  if (f.input_dim() != in || f.output_dim() != out) {
    throw Error(ErrorCode::kPackingMismatch,
                "network maps " + std::to_string(f.input_dim()) + " -> " +
                    std::to_string(f.output_dim()) + ", packing needs " + std::to_string(in) +
                    " -> " + std::to_string(out));
  }
}

// Zero input, zero weight block with random x, random weights with zero x,
// and +-D corners. `weights` is the length of the weight part of the packing.
std::vector<Vector> product_probes(std::size_t width, std::size_t weights, double D,
                                   const CounterRng& rng) {
  std::vector<Vector> probes;
  probes.reserve(kProbeCount);
  const auto uniform = [&](std::size_t p, std::size_t c) {
    return -D + 2.0 * D * rng.uniform(p, static_cast<std::uint32_t>(c), kProbeStream);
  };
  for (std::size_t p = 0; p < kProbeCount; ++p) {
    Vector v(width, 0.0);
    if (p == 0) {
      // origin
    } else if (p < 16) {
      for (std::size_t c = weights; c < width; ++c) v[c] = uniform(p, c);
    } else if (p < 32) {
      for (std::size_t c = 0; c < weights; ++c) v[c] = uniform(p, c);
    } else if (p == 32) {
      std::fill(v.begin(), v.end(), D);
    } else if (p == 33) {
      std::fill(v.begin(), v.end(), -D);
    } else {
      for (std::size_t c = 0; c < width; ++c) {
        const bool neg = rng.bits(p, static_cast<std::uint32_t>(c), kCornerStream) & 1u;
        v[c] = neg ? -D : D;
      }
    }
    probes.push_back(std::move(v));
  }
  return probes;
}

template <class Target>
ErrorReport sampled_report(const Fnn& f, double D, const SamplingOptions& opts,
                           std::size_t weights, Target target) {
  const std::size_t width = f.input_dim();
  const CounterRng rng(opts.seed);
  const auto results = for_chunks(opts.samples, opts.jobs, [&](std::size_t c, ChunkResult& r) {
    Evaluator eval(f);
    Vector x(width);
    const std::size_t end = std::min(opts.samples, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      for (std::size_t k = 0; k < width; ++k) {
        x[k] = -D + 2.0 * D * rng.uniform(i, static_cast<std::uint32_t>(k), kSampleStream);
      }
      r.sup = std::max(r.sup, deviation(eval(x), target(x), r.squares));
    }
  });

  ErrorReport rep;
  ExactSum total;
  for (const auto& r : results) {
    rep.sup_error = std::max(rep.sup_error, r.sup);
    total.merge(r.squares);
  }
  rep.sample_count = opts.samples;
  rep.mse = opts.samples ? total.value() / static_cast<double>(opts.samples) : 0.0;
  if (opts.probes) {
    Evaluator eval(f);
    ExactSum unused;
    for (const Vector& p : product_probes(width, weights, D, rng)) {
      rep.sup_error = std::max(rep.sup_error, deviation(eval(p), target(p), unused));
    }
    rep.probe_count = kProbeCount;
  }
  rep.seed = opts.seed;
  rep.domain_half_width = D;
  return rep;
}

template <class Target, class Truth>
ErrorReport sobolev_report(const Fnn& f, double D, const SamplingOptions& opts, Target target,
                           Truth truth) {
  const std::size_t width = f.input_dim();
  const std::size_t out = f.output_dim();
  const CounterRng rng(opts.seed);

  const auto results = for_chunks(opts.samples, opts.jobs, [&](std::size_t c, ChunkResult& r) {
    Evaluator eval(f);
    Vector x(width);
    const std::size_t end = std::min(opts.samples, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      bool accepted = false;
      for (int a = 0; a < kMaxResample && !accepted; ++a) {
        for (std::size_t k = 0; k < width; ++k) {
          x[k] = -D + 2.0 * D *
                          rng.uniform(i, static_cast<std::uint32_t>(k),
                                      kSampleStream + static_cast<std::uint32_t>(a));
        }
        eval(x);
        accepted = eval.min_hidden_margin() >= kKinkMargin;
      }
      if (!accepted) {
        ++r.skipped;
        continue;
      }
      r.sup = std::max(r.sup, deviation(eval(x), target(x), r.squares));
      const Matrix J = jacobian(f, x);
      for (std::size_t o = 0; o < out; ++o)
        for (std::size_t k = 0; k < width; ++k)
          r.grad = std::max(r.grad, std::fabs(J(o, k) - truth(x, o, k)));
    }
  });

  ErrorReport rep;
  ExactSum total;
  double grad = 0.0;
  for (const auto& r : results) {
    rep.sup_error = std::max(rep.sup_error, r.sup);
    grad = std::max(grad, r.grad);
    total.merge(r.squares);
    rep.skipped_count += r.skipped;
  }
  const std::size_t used = opts.samples - rep.skipped_count;
  rep.grad_sup_error = grad;
  rep.sample_count = opts.samples;
  rep.mse = used ? total.value() / static_cast<double>(used) : 0.0;
  rep.seed = opts.seed;
  rep.domain_half_width = D;
  return rep;
}

}  // namespace

ErrorReport sup_error_matvec(const Fnn& f, std::size_t m, std::size_t n, double D,
                             const SamplingOptions& opts) {
  require_width(f, m * n + n, m);
  return sampled_report(f, D, opts, m * n,
                        [&](std::span<const double> x) { return matvec_target(x, m, n); });
}

ErrorReport sup_error_complex(const Fnn& f, std::size_t m, std::size_t n, double D,
                              const SamplingOptions& opts) {
  require_width(f, 2 * m * n + 2 * n, 2 * m);
  return sampled_report(f, D, opts, 2 * m * n,
                        [&](std::span<const double> x) { return complex_target(x, m, n); });
}

ErrorReport sobolev_error_matvec(const Fnn& f, std::size_t m, std::size_t n, double D,
                                 const SamplingOptions& opts) {
  const std::size_t mn = m * n;
  require_width(f, mn + n, m);
  return sobolev_report(
      f, D, opts, [&](std::span<const double> x) { return matvec_target(x, m, n); },
      // d(W x)_i / dW(i, j) = x_j and d(W x)_i / dx_j = W(i, j).
      [&](std::span<const double> x, std::size_t i, std::size_t k) {
        if (k < mn) return k % m == i ? x[mn + k / m] : 0.0;
        return x[(k - mn) * m + i];
      });
}

ErrorReport error_affine(const Fnn& f, const Matrix& W, double D, const SamplingOptions& opts,
                         bool sobolev) {
  require_width(f, W.cols(), W.rows());
  const auto target = [&](std::span<const double> x) { return matvec(W, x); };
  if (sobolev) {
    return sobolev_report(f, D, opts, target,
                          [&](std::span<const double>, std::size_t i, std::size_t k) {
                            return W(i, k);
                          });
  }
  return sampled_report(f, D, opts, 0, target);
}

SquareDerivativeReport square_derivative_check(const Fnn& f, const SamplingOptions& opts) {
  require_width(f, 1, 1);
  const CounterRng rng(opts.seed);
  SquareDerivativeReport rep;
  Evaluator eval(f);
  ExactSum squares;
  Vector t(1);
  for (std::size_t i = 0; i < opts.samples; ++i) {
    bool accepted = false;
    for (int a = 0; a < kMaxResample && !accepted; ++a) {
      t[0] = rng.uniform(i, 0, kSampleStream + static_cast<std::uint32_t>(a));
      if (t[0] == 0.0) continue;
      eval(t);
      accepted = eval.min_hidden_margin() >= kKinkMargin;
    }
    if (!accepted) {
      ++rep.skipped_count;
      continue;
    }
    const double y = eval(t)[0];
    const double d = jacobian(f, t)(0, 0);
    rep.sup_error = std::max(rep.sup_error, std::fabs(y - t[0] * t[0]));
    rep.max_abs_derivative = std::max(rep.max_abs_derivative, std::fabs(d));
    rep.max_derivative_error = std::max(rep.max_derivative_error, std::fabs(d - 2.0 * t[0]));
    const double e = y - t[0] * t[0];
    squares.add(e * e);
  }
  rep.sample_count = opts.samples;
  const std::size_t used = opts.samples - rep.skipped_count;
  rep.mse = used ? squares.value() / static_cast<double>(used) : 0.0;
  return rep;
}

std::vector<CurvePoint> square_error_curve(int max_order) {
  if (max_order < 0 || max_order > 24) {
    throw Error(ErrorCode::kInvalidArgument, "max_order must lie in [0, 24]");
  }
  std::vector<CurvePoint> curve;
  const double step = 1.0 / static_cast<double>(kCurveGridPoints - 1);
  Vector t(1);
  for (int s = 0; s <= max_order; ++s) {
    const Fnn f = square_net_of_order(s);
    Evaluator eval(f);
    double sup = 0.0;
    ExactSum squares;
    for (std::size_t j = 0; j < kCurveGridPoints; ++j) {
      t[0] = static_cast<double>(j) * step;
      const double e = eval(t)[0] - t[0] * t[0];
      sup = std::max(sup, std::fabs(e));
      squares.add(e * e);
    }
    curve.push_back({s, sup, squares.value() / static_cast<double>(kCurveGridPoints)});
  }
  return curve;
}

ErrorReport error_on_dataset(const Fnn& f, const Dataset& ds, unsigned jobs) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.inputs[i].size() != f.input_dim() || ds.targets[i].size() != f.output_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "dataset sample " + std::to_string(i) + " does not match the network widths",
                  i);
    }
  }
  const auto results = for_chunks(ds.size(), jobs, [&](std::size_t c, ChunkResult& r) {
    Evaluator eval(f);
    const std::size_t end = std::min(ds.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      r.sup = std::max(r.sup, deviation(eval(ds.inputs[i]), ds.targets[i], r.squares));
    }
  });
  ErrorReport rep;
  ExactSum total;
  for (const auto& r : results) {
    rep.sup_error = std::max(rep.sup_error, r.sup);
    total.merge(r.squares);
  }
  rep.sample_count = ds.size();
  rep.mse = ds.size() ? total.value() / static_cast<double>(ds.size()) : 0.0;
  rep.seed = ds.meta.seed;
  rep.domain_half_width = ds.meta.kind == "qpsk_rayleigh" ? ds.meta.clip : ds.meta.half_width;
  return rep;
}

double mse_on_dataset(const Fnn& f, const Dataset& ds, unsigned jobs) {
  return error_on_dataset(f, ds, jobs).mse;
}

BudgetCompliance check_budget(const Fnn& f, const BoundBudget& budget) {
  BudgetCompliance c;
  c.actual = metrics(f);
  c.budget = budget;
  c.depth_ok = static_cast<double>(c.actual.depth) <= std::ceil(budget.depth_bound);
  c.width_ok = static_cast<double>(c.actual.max_width) <= budget.width_bound;
  c.weight_ok = c.actual.max_weight <= budget.weight_bound;
  if (budget.connectivity_bound) {
    c.connectivity_ok = static_cast<double>(c.actual.connectivity) <= *budget.connectivity_bound;
  }
  if (budget.neuron_bound) {
    c.neurons_ok = static_cast<double>(c.actual.neurons) <= *budget.neuron_bound;
  }
  return c;
}

}  // namespace relunet
