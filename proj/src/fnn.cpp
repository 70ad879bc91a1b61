#include "relunet/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relunet/exact_sum.hpp"

namespace relunet {

namespace {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

void check_input(const Fnn& fnn, std::span<const double> x) {
  if (x.size() != fnn.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has " + std::to_string(x.size()) + " entries, network expects " +
                    std::to_string(fnn.input_dim()));
  }
}

}  // namespace

std::optional<StructuralError> validate(std::span<const Layer> layers) {
  if (layers.empty()) {
    return StructuralError{ErrorCode::kInvalidArgument, 0, "network has no layers"};
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const std::size_t k = i + 1;
    if (l.weights.rows() != l.bias.size()) {
      return StructuralError{ErrorCode::kDimensionMismatch, k,
                             "layer " + std::to_string(k) + ": weights have " +
                                 std::to_string(l.weights.rows()) + " rows, bias has " +
                                 std::to_string(l.bias.size()) + " entries"};
    }
    if (l.weights.rows() == 0 || l.weights.cols() == 0) {
      return StructuralError{ErrorCode::kDimensionMismatch, k,
                             "layer " + std::to_string(k) + " has an empty weight matrix"};
    }
    if (i > 0 && l.in_dim() != layers[i - 1].out_dim()) {
      return StructuralError{ErrorCode::kDimensionMismatch, k,
                             "layer " + std::to_string(k) + " expects " +
                                 std::to_string(l.in_dim()) + " inputs but layer " +
                                 std::to_string(i) + " produces " +
                                 std::to_string(layers[i - 1].out_dim())};
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weights.data().begin(), l.weights.data().end(), finite) ||
        !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
      return StructuralError{ErrorCode::kNonfiniteEntry, k,
                             "layer " + std::to_string(k) + " contains a non-finite entry"};
    }
  }
  return std::nullopt;
}

std::optional<StructuralError> validate(const Fnn& fnn) { return validate(fnn.layers()); }

Fnn::Fnn(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (auto err = relunet::validate(layers_)) {
    throw Error(err->code, err->message, err->layer);
  }
  sparse_.reserve(layers_.size());
  for (const Layer& l : layers_) {
    SparseRows s;
    s.offsets.reserve(l.out_dim() + 1);
    s.offsets.push_back(0);
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      const auto row = l.weights.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] != 0.0) {
          s.cols.push_back(static_cast<std::uint32_t>(c));
          s.values.push_back(row[c]);
        }
      }
      s.offsets.push_back(static_cast<std::uint32_t>(s.cols.size()));
    }
    sparse_.push_back(std::move(s));
  }
}

std::size_t Fnn::width(std::size_t k) const {
  if (k > depth()) throw Error(ErrorCode::kInvalidArgument, "layer index out of range");
  return k == 0 ? input_dim() : layers_[k - 1].out_dim();
}

NetworkMetrics metrics(const Fnn& fnn) {
  NetworkMetrics m;
  m.depth = fnn.depth();
  m.neurons = fnn.input_dim();
  m.max_width = fnn.input_dim();
  for (const Layer& l : fnn.layers()) {
    m.connectivity += l.weights.nonzeros() + nonzeros(l.bias);
    m.neurons += l.out_dim();
    m.max_width = std::max(m.max_width, l.out_dim());
    m.max_weight = std::max({m.max_weight, l.weights.max_abs(), max_abs(l.bias)});
  }
  return m;
}

Evaluator::Evaluator(const Fnn& fnn) : fnn_(&fnn) {
  std::size_t w = fnn.input_dim();
  for (const Layer& l : fnn.layers()) w = std::max(w, l.out_dim());
  a_.resize(w);
  b_.resize(w);
}

std::span<const double> Evaluator::operator()(std::span<const double> x) {
  check_input(*fnn_, x);
  std::copy(x.begin(), x.end(), a_.begin());
  min_margin_ = std::numeric_limits<double>::infinity();
  const std::size_t K = fnn_->depth();
  ExactSum acc;
  for (std::size_t k = 0; k < K; ++k) {
    const Layer& layer = fnn_->layers_[k];
    const Fnn::SparseRows& s = fnn_->sparse_[k];
    const bool hidden = k + 1 < K;
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      acc.clear();
      for (std::uint32_t e = s.offsets[r]; e < s.offsets[r + 1]; ++e) {
        acc.add(s.values[e] * a_[s.cols[e]]);
      }
      acc.add(layer.bias[r]);
      const double z = acc.value();
      if (hidden) {
        min_margin_ = std::min(min_margin_, std::fabs(z));
        b_[r] = relu(z);
      } else {
        b_[r] = z;
      }
    }
    std::swap(a_, b_);
  }
  return {a_.data(), fnn_->output_dim()};
}

Vector evaluate(const Fnn& fnn, std::span<const double> x) {
  Evaluator eval(fnn);
  const auto y = eval(x);
  return Vector(y.begin(), y.end());
}

std::vector<Vector> evaluate_batch(const Fnn& fnn, const std::vector<Vector>& xs) {
  std::vector<Vector> out;
  out.reserve(xs.size());
  Evaluator eval(fnn);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != fnn.input_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "batch element " + std::to_string(i) + " has " + std::to_string(xs[i].size()) +
                      " entries, network expects " + std::to_string(fnn.input_dim()),
                  i);
    }
    const auto y = eval(xs[i]);
    out.emplace_back(y.begin(), y.end());
  }
  return out;
}

std::vector<Vector> preactivations(const Fnn& fnn, std::span<const double> x) {
  check_input(fnn, x);
  std::vector<Vector> out;
  out.reserve(fnn.depth());
  Vector a(x.begin(), x.end());
  for (std::size_t k = 1; k <= fnn.depth(); ++k) {
    const Layer& l = fnn.layer(k);
    Vector z(l.out_dim());
    ExactSum acc;
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      acc.clear();
      const auto row = l.weights.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] != 0.0) acc.add(row[c] * a[c]);
      }
      acc.add(l.bias[r]);
      z[r] = acc.value();
    }
    a.resize(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) a[r] = relu(z[r]);
    out.push_back(std::move(z));
  }
  return out;
}

Matrix jacobian(const Fnn& fnn, std::span<const double> x) {
  check_input(fnn, x);
  const std::size_t n0 = fnn.input_dim();
  const auto pre = preactivations(fnn, x);
  Matrix j_prev = Matrix::identity(n0);
  std::vector<ExactSum> acc(n0);
  for (std::size_t k = 0; k < fnn.depth(); ++k) {
    const Layer& layer = fnn.layers_[k];
    const Fnn::SparseRows& s = fnn.sparse_[k];
    const bool hidden = k + 1 < fnn.depth();
    Matrix j_next(layer.out_dim(), n0);
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      if (hidden && !(pre[k][r] > 0.0)) continue;
      for (auto& a : acc) a.clear();
      for (std::uint32_t e = s.offsets[r]; e < s.offsets[r + 1]; ++e) {
        const double w = s.values[e];
        const auto src = j_prev.row(s.cols[e]);
        for (std::size_t c = 0; c < n0; ++c) {
          if (src[c] != 0.0) acc[c].add(w * src[c]);
        }
      }
      for (std::size_t c = 0; c < n0; ++c) j_next(r, c) = acc[c].value();
    }
    j_prev = std::move(j_next);
  }
  return j_prev;
}

}  // namespace relunet
