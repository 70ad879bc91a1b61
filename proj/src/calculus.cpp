#include "relunet/calculus.hpp"

#include <algorithm>

#include "relunet/exact_sum.hpp"

namespace relunet {

namespace {

Vector stack(const std::vector<const Vector*>& parts) {
  Vector out;
  for (const Vector* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

std::size_t max_depth(std::span<const Fnn> fnns) {
  std::size_t K = 0;
  for (const Fnn& f : fnns) K = std::max(K, f.depth());
  return K;
}

void require_nonempty(std::span<const Fnn> fnns, const char* op) {
  if (fnns.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(op) + ": no networks given");
  }
}

}  // namespace

Fnn identity_fnn(std::size_t d, std::size_t K) {
  if (d < 1 || K < 1) {
    throw Error(ErrorCode::kInvalidArgument, "identity_fnn: d and K must be at least 1");
  }
  if (K == 1) return Fnn({Layer{Matrix::identity(d), Vector(d, 0.0)}});

  const Matrix eye = Matrix::identity(d);
  std::vector<Layer> layers;
  layers.reserve(K);
  layers.push_back({vstack(eye, -eye), Vector(2 * d, 0.0)});
  for (std::size_t k = 0; k + 2 < K; ++k) {
    layers.push_back({Matrix::identity(2 * d), Vector(2 * d, 0.0)});
  }
  layers.push_back({hstack(eye, -eye), Vector(d, 0.0)});
  return Fnn(std::move(layers));
}

Fnn concatenate(const Fnn& outer, const Fnn& inner) {
  if (outer.input_dim() != inner.output_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "concatenate: outer network reads " + std::to_string(outer.input_dim()) +
                    " inputs but inner network produces " + std::to_string(inner.output_dim()));
  }
  const Layer& first = outer.layer(1);
  const Layer& last = inner.layer(inner.depth());

  Layer merged{matmul(first.weights, last.weights), Vector(first.out_dim())};
  ExactSum acc;
  for (std::size_t r = 0; r < first.out_dim(); ++r) {
    acc.clear();
    const auto row = first.weights.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) acc.add(row[c] * last.bias[c]);
    acc.add(first.bias[r]);
    merged.bias[r] = acc.value();
  }

  std::vector<Layer> layers(inner.layers().begin(), inner.layers().end() - 1);
  layers.push_back(std::move(merged));
  layers.insert(layers.end(), outer.layers().begin() + 1, outer.layers().end());
  return Fnn(std::move(layers));
}

Fnn match_depth(const Fnn& f, std::size_t K) {
  if (K < f.depth()) {
    throw Error(ErrorCode::kInvalidArgument,
                "match_depth: target depth " + std::to_string(K) + " is below network depth " +
                    std::to_string(f.depth()));
  }
  if (K == f.depth()) return f;
  return concatenate(identity_fnn(f.output_dim(), K - f.depth() + 1), f);
}

Fnn parallelize_shared(std::span<const Fnn> fnns) {
  require_nonempty(fnns, "parallelize_shared");
  const std::size_t n0 = fnns.front().input_dim();
  const std::size_t K = fnns.front().depth();
  for (std::size_t i = 1; i < fnns.size(); ++i) {
    if (fnns[i].input_dim() != n0) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "parallelize_shared: network " + std::to_string(i) + " has input width " +
                      std::to_string(fnns[i].input_dim()) + ", expected " + std::to_string(n0),
                  i);
    }
    if (fnns[i].depth() != K) {
      throw Error(ErrorCode::kDepthMismatch,
                  "parallelize_shared: network " + std::to_string(i) + " has depth " +
                      std::to_string(fnns[i].depth()) + ", expected " + std::to_string(K),
                  i);
    }
  }
  if (fnns.size() == 1) return fnns.front();

  std::vector<Layer> layers;
  layers.reserve(K);
  for (std::size_t k = 1; k <= K; ++k) {
    std::vector<const Matrix*> ws;
    std::vector<const Vector*> bs;
    for (const Fnn& f : fnns) {
      ws.push_back(&f.layer(k).weights);
      bs.push_back(&f.layer(k).bias);
    }
    Matrix w;
    if (k == 1) {
      w = *ws.front();
      for (std::size_t i = 1; i < ws.size(); ++i) w = vstack(w, *ws[i]);
    } else {
      w = block_diag(ws);
    }
    layers.push_back({std::move(w), stack(bs)});
  }
  return Fnn(std::move(layers));
}

std::vector<std::size_t> disjoint_input_offsets(std::span<const Fnn> fnns) {
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const Fnn& f : fnns) {
    offsets.push_back(at);
    at += f.input_dim();
  }
  return offsets;
}

Fnn parallelize_disjoint(std::span<const Fnn> fnns, std::span<const double> coeffs) {
  require_nonempty(fnns, "parallelize_disjoint");
  if (coeffs.size() != fnns.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "parallelize_disjoint: " + std::to_string(coeffs.size()) + " coefficients for " +
                    std::to_string(fnns.size()) + " networks");
  }
  const std::size_t K = max_depth(fnns);
  std::vector<Fnn> matched;
  matched.reserve(fnns.size());
  for (std::size_t i = 0; i < fnns.size(); ++i) {
    const Fnn f = match_depth(fnns[i], K);
    if (coeffs[i] == 1.0) {
      matched.push_back(f);
      continue;
    }
    std::vector<Layer> layers(f.layers().begin(), f.layers().end());
    Layer& last = layers.back();
    last.weights = last.weights.scaled(coeffs[i]);
    for (double& b : last.bias) b *= coeffs[i];
    matched.emplace_back(std::move(layers));
  }

  std::vector<Layer> layers;
  layers.reserve(K);
  for (std::size_t k = 1; k <= K; ++k) {
    std::vector<const Matrix*> ws;
    std::vector<const Vector*> bs;
    for (const Fnn& f : matched) {
      ws.push_back(&f.layer(k).weights);
      bs.push_back(&f.layer(k).bias);
    }
    layers.push_back({block_diag(ws), stack(bs)});
  }
  return Fnn(std::move(layers));
}

Fnn superpose(std::span<const Fnn> fnns, std::span<const double> coeffs, bool shared_input) {
  require_nonempty(fnns, "superpose");
  if (coeffs.size() != fnns.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "superpose: " + std::to_string(coeffs.size()) + " coefficients for " +
                    std::to_string(fnns.size()) + " networks");
  }
  const std::size_t d = fnns.front().output_dim();
  for (std::size_t i = 1; i < fnns.size(); ++i) {
    if (fnns[i].output_dim() != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "superpose: network " + std::to_string(i) + " has output width " +
                      std::to_string(fnns[i].output_dim()) + ", expected " + std::to_string(d),
                  i);
    }
    if (shared_input && fnns[i].input_dim() != fnns.front().input_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "superpose: shared input widths differ at network " + std::to_string(i), i);
    }
  }

  const std::size_t n = fnns.size();
  Fnn stacked = [&] {
    if (!shared_input) {
      const Vector ones(n, 1.0);
      return parallelize_disjoint(fnns, ones);
    }
    const std::size_t K = max_depth(fnns);
    std::vector<Fnn> matched;
    matched.reserve(n);
    for (const Fnn& f : fnns) matched.push_back(match_depth(f, K));
    return parallelize_shared(matched);
  }();

  Matrix sum_row(d, n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) sum_row(j, i * d + j) = coeffs[i];
  const Fnn summing({Layer{std::move(sum_row), Vector(d, 0.0)}});
  return concatenate(summing, stacked);
}

Matrix selection_matrix(std::span<const std::size_t> picks, std::size_t full_width) {
  Matrix s(picks.size(), full_width);
  for (std::size_t r = 0; r < picks.size(); ++r) {
    if (picks[r] >= full_width) {
      throw Error(ErrorCode::kInvalidSelector,
                  "selection index " + std::to_string(picks[r]) + " outside width " +
                      std::to_string(full_width),
                  r);
    }
    s(r, picks[r]) = 1.0;
  }
  return s;
}

Fnn compose_selection(const Fnn& f, const Matrix& selector) {
  if (selector.rows() != f.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "compose_selection: selector has " + std::to_string(selector.rows()) +
                    " rows, network reads " + std::to_string(f.input_dim()));
  }
  for (std::size_t r = 0; r < selector.rows(); ++r) {
    std::size_t ones = 0;
    for (double v : selector.row(r)) {
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ones = 2;
        break;
      }
    }
    if (ones != 1) {
      throw Error(ErrorCode::kInvalidSelector,
                  "selector row " + std::to_string(r) + " does not contain exactly one 1", r);
    }
  }
  std::vector<Layer> layers(f.layers().begin(), f.layers().end());
  layers.front().weights = matmul(layers.front().weights, selector);
  return Fnn(std::move(layers));
}

}  // namespace relunet
