#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relunet/error.hpp"
#include "relunet/matrix.hpp"

namespace relunet {

// One affine map x -> W x + b of a ReLU network.
struct Layer {
  Matrix weights;  // N_k x N_{k-1}
  Vector bias;     // N_k

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct StructuralError {
  ErrorCode code;
  std::size_t layer;  // 1-based index of the first offending layer
  std::string message;
};

// Checks shape consistency and finiteness. Returns the first violation.
std::optional<StructuralError> validate(std::span<const Layer> layers);

// A ReLU feedforward network: ReLU after every layer except the last.
// Immutable once built; the constructor rejects anything `validate` rejects.
class Fnn {
 public:
  explicit Fnn(std::vector<Layer> layers);

  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t input_dim() const noexcept { return layers_.front().in_dim(); }
  std::size_t output_dim() const noexcept { return layers_.back().out_dim(); }
  // N_k for k = 0..depth().
  std::size_t width(std::size_t k) const;

  std::span<const Layer> layers() const noexcept { return layers_; }
  // 1-based, matching the usual W_1 ... W_K numbering.
  const Layer& layer(std::size_t k) const { return layers_.at(k - 1); }

  friend bool operator==(const Fnn& a, const Fnn& b) { return a.layers_ == b.layers_; }

 private:
  friend class Evaluator;
  friend Matrix jacobian(const Fnn&, std::span<const double>);

  // Nonzero pattern of each weight matrix, row by row.
  struct SparseRows {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> cols;
    std::vector<double> values;
  };

  std::vector<Layer> layers_;
  std::vector<SparseRows> sparse_;
};

std::optional<StructuralError> validate(const Fnn& fnn);

struct NetworkMetrics {
  std::size_t depth = 0;         // L
  std::size_t connectivity = 0;  // M: nonzero weights and biases
  std::size_t neurons = 0;       // N: sum of N_k including the input layer
  std::size_t max_width = 0;     // W
  double max_weight = 0.0;       // B

  friend bool operator==(const NetworkMetrics&, const NetworkMetrics&) = default;
};

NetworkMetrics metrics(const Fnn& fnn);

// Reusable forward pass. Each pre-activation is the correctly rounded value
// of sum_j w_ij x_j + b_i, so results do not depend on neuron ordering.
class Evaluator {
 public:
  explicit Evaluator(const Fnn& fnn);

  std::span<const double> operator()(std::span<const double> x);
  // Smallest |pre-activation| over hidden neurons from the last call.
  double min_hidden_margin() const noexcept { return min_margin_; }

 private:
  const Fnn* fnn_;
  Vector a_, b_;
  double min_margin_ = 0.0;
};

Vector evaluate(const Fnn& fnn, std::span<const double> x);
std::vector<Vector> evaluate_batch(const Fnn& fnn, const std::vector<Vector>& xs);

// Pre-activations of every layer (hidden and output) for input x.
std::vector<Vector> preactivations(const Fnn& fnn, std::span<const double> x);

// Almost-everywhere derivative W_K D_{K-1} W_{K-1} ... D_1 W_1, with the
// ReLU mask taken as 0 where a pre-activation is exactly 0.
Matrix jacobian(const Fnn& fnn, std::span<const double> x);

}  // namespace relunet
