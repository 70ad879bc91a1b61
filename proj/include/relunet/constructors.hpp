#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "relunet/fnn.hpp"

namespace relunet {

enum class ConstructionKind {
  kSquare,
  kScalarProduct,
  kDotProduct,
  kMatvec,
  kComplexMatvec,
  kAffineV1,
  kAffineV2,
  kAffineV3,
};

std::string_view to_string(ConstructionKind kind);
std::optional<ConstructionKind> parse_kind(std::string_view name);

// Which norm the sawtooth order is sized for. kSup meets the value bound
// only; kSobolev additionally bounds every first partial derivative.
enum class AccuracyNorm { kSup, kSobolev };

std::string_view to_string(AccuracyNorm norm);
std::optional<AccuracyNorm> parse_norm(std::string_view name);

struct BuildOptions {
  AccuracyNorm norm = AccuracyNorm::kSup;
  // Forces the sawtooth order of every squaring block (used to build
  // deliberately under-resolved networks).
  std::optional<int> sawtooth_override;
};

// Construction parameters and the resulting input layout.
struct ConstructionRecord {
  ConstructionKind kind = ConstructionKind::kSquare;
  std::size_t m = 1;
  std::size_t n = 1;
  double D = 1.0;
  double eps = 0.25;
  int sawtooth_order = 0;
  AccuracyNorm norm = AccuracyNorm::kSup;
  std::size_t depth = 3;  // K of the affine variants 2 and 3
  std::uint64_t seed = 0;
  std::string input_packing;
};

std::string input_packing(ConstructionKind kind, std::size_t m, std::size_t n);

struct BudgetConstants {
  double C = 2.0;
  // Sobolev depth law c1 log2(1/eps) + c2. Unset means c1 = C and
  // c2 = C log2(n D^2), i.e. the value-norm law of the same construction.
  std::optional<double> sobolev_c1;
  std::optional<double> sobolev_c2;
  std::size_t affine_depth = 3;  // K for the affine variants 2 and 3
};

struct BoundBudget {
  double target_eps = 0.0;
  double depth_bound = 0.0;
  double width_bound = 0.0;
  double weight_bound = 0.0;
  std::optional<double> connectivity_bound;
  std::optional<double> neuron_bound;
  double depth_constant = 2.0;
};

BoundBudget predicted_budget(ConstructionKind kind, std::size_t m, std::size_t n, double D,
                             double eps, const BudgetConstants& constants = {},
                             AccuracyNorm norm = AccuracyNorm::kSup);

// Smallest s >= 0 with 2^{-2(s+1)} <= delta.
int sawtooth_order(double delta);

// Sawtooth order used by each squaring block of scalar_product_net(D, eps).
int scalar_product_order(double D, double eps, const BuildOptions& opts = {});

// Width-4 network on [0, 1] computing f_s(t) = t - sum_{k<=s} g_k(t) / 4^k.
// Depth s + 1, all weights in [-4, 4], exact 0 at t = 0.
Fnn square_net_of_order(int s);
Fnn square_net(double eps);

// (w, x) -> approximately w x on [-D, D]^2 via the polarization identity.
Fnn scalar_product_net(double D, double eps, const BuildOptions& opts = {});

// (w_1..w_n, x_1..x_n) -> approximately sum_i w_i x_i.
Fnn dot_product_net(std::size_t n, double D, double eps, const BuildOptions& opts = {});

// [vec(W) column-major, x] -> approximately W x for W in R^{m x n}.
Fnn matvec_net(std::size_t m, std::size_t n, double D, double eps,
               const BuildOptions& opts = {});

// [vec(W1), vec(W2), x1, x2] -> approximately [W1 x1 - W2 x2; W1 x2 + W2 x1].
Fnn complex_matvec_net(std::size_t m, std::size_t n, double D, double eps,
                       const BuildOptions& opts = {});

// Exact representations of x -> W x. Variant 1 has depth 2; variants 2 and 3
// have depth K >= 3 with the identity section before or after the product.
Fnn affine_representation(const Matrix& W, int variant, std::size_t K = 3);

struct BuiltNetwork {
  Fnn fnn;
  ConstructionRecord record;
  // Only set for the affine kinds.
  std::optional<Matrix> matrix;
};

// Random matrix for the affine kinds: entries on the 2^10 + 1 point grid of
// [-D, D], with about a quarter forced to zero.
Matrix random_affine_matrix(std::size_t m, std::size_t n, double D, std::uint64_t seed);

// Builds the network described by `params` and fills in sawtooth order and
// packing. Throws invalid-argument when parameters are out of range.
BuiltNetwork build_network(const ConstructionRecord& params, const BuildOptions& opts = {});

}  // namespace relunet
