#include "relunet/constructors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "relunet/calculus.hpp"
#include "relunet/rng.hpp"

namespace relunet {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

void require_eps(double eps) {
  require(std::isfinite(eps) && eps > 0.0 && eps < 0.5,
          "eps must lie in (0, 1/2), got " + std::to_string(eps));
}

void require_D(double D) {
  require(std::isfinite(D) && D > 0.0, "D must be positive, got " + std::to_string(D));
}

// Smallest s >= 0 with scale * 2^-s <= eps.
int derivative_order(double scale, double eps) {
  int s = 0;
  while (std::ldexp(scale, -s) > eps) ++s;
  return s;
}

// Accuracy handed to each scalar product block of a construction.
double per_product_eps(ConstructionKind kind, std::size_t n, double eps) {
  switch (kind) {
    case ConstructionKind::kDotProduct:
    case ConstructionKind::kMatvec:
      return eps / static_cast<double>(n);
    case ConstructionKind::kComplexMatvec:
      return eps / 4.0 / static_cast<double>(n);
    default:
      return eps;
  }
}

double log_factor(ConstructionKind kind, std::size_t n, double D) {
  const double nd = static_cast<double>(n);
  switch (kind) {
    case ConstructionKind::kSquare:
      return 1.0;
    case ConstructionKind::kScalarProduct:
      return D * D;
    case ConstructionKind::kDotProduct:
    case ConstructionKind::kMatvec:
      return nd * D * D;
    case ConstructionKind::kComplexMatvec:
      return 4.0 * nd * D * D;
    default:
      return 1.0;
  }
}

// (w, x) -> (|w|, |x|, |w + x|) / (2D) through rho(t) + rho(-t).
Fnn abs_scaling_net(double D) {
  const double g = 0.5 / D;
  Matrix w1{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
  Matrix w2{{g, g, 0, 0, 0, 0}, {0, 0, g, g, 0, 0}, {0, 0, 0, 0, g, g}};
  return Fnn({Layer{std::move(w1), Vector(6, 0.0)}, Layer{std::move(w2), Vector(3, 0.0)}});
}

// m row networks reading W(i, :) from the block at w_offset and x from
// x_offset of a packed input of width `full`.
Fnn row_networks(const Fnn& dot, std::size_t m, std::size_t n, std::size_t w_offset,
                 std::size_t x_offset, std::size_t full) {
  std::vector<Fnn> rows;
  rows.reserve(m);
  std::vector<std::size_t> picks(2 * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      picks[j] = w_offset + j * m + i;
      picks[n + j] = x_offset + j;
    }
    rows.push_back(compose_selection(dot, selection_matrix(picks, full)));
  }
  return parallelize_shared(rows);
}

}  // namespace

std::string_view to_string(ConstructionKind kind) {
  switch (kind) {
    case ConstructionKind::kSquare: return "square";
    case ConstructionKind::kScalarProduct: return "scalar_product";
    case ConstructionKind::kDotProduct: return "dot_product";
    case ConstructionKind::kMatvec: return "matvec";
    case ConstructionKind::kComplexMatvec: return "complex_matvec";
    case ConstructionKind::kAffineV1: return "affine_v1";
    case ConstructionKind::kAffineV2: return "affine_v2";
    case ConstructionKind::kAffineV3: return "affine_v3";
  }
  return "unknown";
}

std::optional<ConstructionKind> parse_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ConstructionKind::kAffineV3); ++k) {
    const auto kind = static_cast<ConstructionKind>(k);
    if (to_string(kind) == name) return kind;
  }
  if (name == "scalar") return ConstructionKind::kScalarProduct;
  if (name == "dot") return ConstructionKind::kDotProduct;
  if (name == "complex") return ConstructionKind::kComplexMatvec;
  return std::nullopt;
}

std::string_view to_string(AccuracyNorm norm) {
  return norm == AccuracyNorm::kSup ? "sup" : "sobolev";
}

std::optional<AccuracyNorm> parse_norm(std::string_view name) {
  if (name == "sup") return AccuracyNorm::kSup;
  if (name == "sobolev") return AccuracyNorm::kSobolev;
  return std::nullopt;
}

std::string input_packing(ConstructionKind kind, std::size_t m, std::size_t n) {
  const auto s = [](std::size_t v) { return std::to_string(v); };
  switch (kind) {
    case ConstructionKind::kSquare:
      return "t in [0,1]";
    case ConstructionKind::kScalarProduct:
      return "(w, x)";
    case ConstructionKind::kDotProduct:
      return "(w_1..w_" + s(n) + ", x_1..x_" + s(n) + ")";
    case ConstructionKind::kMatvec:
      return "[vec(W) column-major " + s(m) + "x" + s(n) + ", x (" + s(n) + ")]";
    case ConstructionKind::kComplexMatvec:
      return "[vec(W1), vec(W2) column-major " + s(m) + "x" + s(n) + ", x1, x2 (" + s(n) +
             " each)]";
    default:
      return "x (" + s(n) + ")";
  }
}

int sawtooth_order(double delta) {
  require(delta > 0.0 && !std::isnan(delta), "sawtooth accuracy must be positive");
  int s = 0;
  while (std::ldexp(1.0, -2 * (s + 1)) > delta) ++s;
  return s;
}

int scalar_product_order(double D, double eps, const BuildOptions& opts) {
  if (opts.sawtooth_override) {
    require(*opts.sawtooth_override >= 0, "sawtooth order must be nonnegative");
    return *opts.sawtooth_override;
  }
  int s = sawtooth_order(eps / (6.0 * D * D));
  // Each first partial of the product network deviates from the true one by
  // at most 2D * 2^-s, the slope error of the order-s interpolant scaled.
  if (opts.norm == AccuracyNorm::kSobolev) s = std::max(s, derivative_order(2.0 * D, eps));
  return s;
}

Fnn square_net_of_order(int s) {
  require(s >= 0, "sawtooth order must be nonnegative");
  if (s == 0) return Fnn({Layer{Matrix{{1.0}}, Vector{0.0}}});

  std::vector<Layer> layers;
  layers.reserve(static_cast<std::size_t>(s) + 1);
  layers.push_back({Matrix{{1}, {1}, {1}, {1}}, Vector{0.0, -0.5, -1.0, 0.0}});
  // Channels 1-3 carry the hat pieces of g_k, channel 4 the running
  // interpolant, which is nonnegative on [0, 1] and so survives the ReLU.
  for (int k = 1; k < s; ++k) {
    const double c = std::ldexp(1.0, -2 * k);
    layers.push_back({Matrix{{2, -4, 2, 0}, {2, -4, 2, 0}, {2, -4, 2, 0},
                             {-2 * c, 4 * c, -2 * c, 1}},
                      Vector{0.0, -0.5, -1.0, 0.0}});
  }
  const double c = std::ldexp(1.0, -2 * s);
  layers.push_back({Matrix{{-2 * c, 4 * c, -2 * c, 1}}, Vector{0.0}});
  return Fnn(std::move(layers));
}

Fnn square_net(double eps) {
  require_eps(eps);
  return square_net_of_order(sawtooth_order(eps));
}

Fnn scalar_product_net(double D, double eps, const BuildOptions& opts) {
  require_D(D);
  require_eps(eps);
  const Fnn sq = square_net_of_order(scalar_product_order(D, eps, opts));
  const std::vector<Fnn> squares{sq, sq, sq};
  const Vector ones(3, 1.0);
  const Fnn branches = concatenate(parallelize_disjoint(squares, ones), abs_scaling_net(D));
  // wx = 2D^2 ( f(|w+x|/2D) - f(|w|/2D) - f(|x|/2D) )
  const double a = 2.0 * D * D;
  const Fnn combine({Layer{Matrix{{-a, -a, a}}, Vector{0.0}}});
  return concatenate(combine, branches);
}

Fnn dot_product_net(std::size_t n, double D, double eps, const BuildOptions& opts) {
  require(n >= 1, "n must be at least 1");
  require_eps(eps);
  const Fnn sp = scalar_product_net(D, eps / static_cast<double>(n), opts);
  std::vector<Fnn> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t picks[2] = {i, n + i};
    terms.push_back(compose_selection(sp, selection_matrix(picks, 2 * n)));
  }
  const Vector ones(n, 1.0);
  return superpose(terms, ones, true);
}

Fnn matvec_net(std::size_t m, std::size_t n, double D, double eps, const BuildOptions& opts) {
  require(m >= 1 && n >= 1, "m and n must be at least 1");
  const Fnn dot = dot_product_net(n, D, eps, opts);
  return row_networks(dot, m, n, 0, m * n, m * n + n);
}

Fnn complex_matvec_net(std::size_t m, std::size_t n, double D, double eps,
                       const BuildOptions& opts) {
  require(m >= 1 && n >= 1, "m and n must be at least 1");
  require_eps(eps);
  const Fnn dot = dot_product_net(n, D, eps / 4.0, opts);
  const std::size_t mn = m * n;
  const std::size_t full = 2 * mn + 2 * n;
  const std::size_t w1 = 0, w2 = mn, x1 = 2 * mn, x2 = 2 * mn + n;

  const std::vector<Fnn> real_part{row_networks(dot, m, n, w1, x1, full),
                                   row_networks(dot, m, n, w2, x2, full)};
  const std::vector<Fnn> imag_part{row_networks(dot, m, n, w1, x2, full),
                                   row_networks(dot, m, n, w2, x1, full)};
  const Vector re_coeffs{1.0, -1.0};
  const Vector im_coeffs{1.0, 1.0};
  const std::vector<Fnn> halves{superpose(real_part, re_coeffs, true),
                                superpose(imag_part, im_coeffs, true)};
  return parallelize_shared(halves);
}

Fnn affine_representation(const Matrix& W, int variant, std::size_t K) {
  require(!W.empty(), "affine representation needs a nonempty matrix");
  require(variant >= 1 && variant <= 3, "variant must be 1, 2 or 3");
  const std::size_t m = W.rows();
  const Matrix eye = Matrix::identity(m);
  const Fnn v1({Layer{vstack(W, -W), Vector(2 * m, 0.0)},
                Layer{hstack(eye, -eye), Vector(m, 0.0)}});
  if (variant == 1) return v1;
  require(K >= 3, "variants 2 and 3 need depth K >= 3");
  if (variant == 2) return concatenate(v1, identity_fnn(W.cols(), K - 1));
  return concatenate(identity_fnn(m, K - 1), v1);
}

BoundBudget predicted_budget(ConstructionKind kind, std::size_t m, std::size_t n, double D,
                             double eps, const BudgetConstants& constants, AccuracyNorm norm) {
  BoundBudget b;
  b.target_eps = eps;
  b.depth_constant = constants.C;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double factor = log_factor(kind, n, D);
  if (norm == AccuracyNorm::kSobolev) {
    const double c1 = constants.sobolev_c1.value_or(constants.C);
    const double c2 = constants.sobolev_c2.value_or(constants.C * std::log2(factor));
    b.depth_bound = c1 * std::log2(1.0 / eps) + c2;
  } else {
    b.depth_bound = constants.C * std::log2(factor / eps);
  }
  b.weight_bound = std::max(4.0, 2.0 * D * D);

  switch (kind) {
    case ConstructionKind::kSquare:
      b.width_bound = 4.0;
      b.weight_bound = 4.0;
      break;
    case ConstructionKind::kScalarProduct:
      b.width_bound = 12.0;
      break;
    case ConstructionKind::kDotProduct:
      b.width_bound = 12.0 * nd;
      break;
    case ConstructionKind::kMatvec:
      b.width_bound = 12.0 * md * nd;
      break;
    case ConstructionKind::kComplexMatvec:
      b.width_bound = 48.0 * md * nd;
      break;
    case ConstructionKind::kAffineV1:
    case ConstructionKind::kAffineV2:
    case ConstructionKind::kAffineV3: {
      // Exact constructions: depth and widths are known, connectivity is
      // bounded by taking W dense.
      const double K =
          kind == ConstructionKind::kAffineV1 ? 2.0 : static_cast<double>(constants.affine_depth);
      b.depth_bound = K;
      b.weight_bound = std::max(1.0, D);
      if (kind == ConstructionKind::kAffineV2) {
        b.width_bound = std::max(2.0 * nd, 2.0 * md);
        b.connectivity_bound = 2.0 * md + 2.0 * (K - 2.0) * nd + 4.0 * md * nd;
        b.neuron_bound = nd + 2.0 * nd * (K - 2.0) + 3.0 * md;
      } else if (kind == ConstructionKind::kAffineV3) {
        b.width_bound = std::max(nd, 2.0 * md);
        b.connectivity_bound = 2.0 * K * md + 2.0 * md * nd;
        b.neuron_bound = nd + 2.0 * md * (K - 1.0) + md;
      } else {
        b.width_bound = std::max(nd, 2.0 * md);
        b.connectivity_bound = 2.0 * md * nd + 2.0 * md;
        b.neuron_bound = nd + 3.0 * md;
      }
      break;
    }
  }
  return b;
}

Matrix random_affine_matrix(std::size_t m, std::size_t n, double D, std::uint64_t seed) {
  const CounterRng rng(seed);
  constexpr std::uint64_t kGrid = 1025;
  Matrix W(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const auto coord = static_cast<std::uint32_t>(r * n + c);
      if (rng.below(4, 0, coord, 1) == 0) continue;
      const double j = static_cast<double>(rng.below(kGrid, 0, coord, 0));
      W(r, c) = -D + 2.0 * D * j / static_cast<double>(kGrid - 1);
    }
  }
  return W;
}

BuiltNetwork build_network(const ConstructionRecord& params, const BuildOptions& opts) {
  ConstructionRecord rec = params;
  rec.norm = opts.norm;
  rec.input_packing = input_packing(rec.kind, rec.m, rec.n);
  require(rec.m >= 1 && rec.n >= 1, "m and n must be at least 1");
  require_D(rec.D);

  const auto affine = [&](int variant) {
    Matrix W = random_affine_matrix(rec.m, rec.n, rec.D, rec.seed);
    rec.sawtooth_order = 0;
    if (variant == 1) rec.depth = 2;
    Fnn f = affine_representation(W, variant, rec.depth);
    return BuiltNetwork{std::move(f), rec, std::move(W)};
  };

  switch (rec.kind) {
    case ConstructionKind::kAffineV1: return affine(1);
    case ConstructionKind::kAffineV2: return affine(2);
    case ConstructionKind::kAffineV3: return affine(3);
    default: break;
  }

  require_eps(rec.eps);
  if (rec.kind == ConstructionKind::kSquare) {
    int s = opts.sawtooth_override.value_or(sawtooth_order(rec.eps));
    if (!opts.sawtooth_override && opts.norm == AccuracyNorm::kSobolev) {
      s = std::max(s, derivative_order(1.0, rec.eps));
    }
    rec.sawtooth_order = s;
    rec.m = rec.n = 1;
    rec.input_packing = input_packing(rec.kind, 1, 1);
    return {square_net_of_order(s), rec, std::nullopt};
  }

  rec.sawtooth_order =
      scalar_product_order(rec.D, per_product_eps(rec.kind, rec.n, rec.eps), opts);
  switch (rec.kind) {
    case ConstructionKind::kScalarProduct:
      rec.m = rec.n = 1;
      rec.input_packing = input_packing(rec.kind, 1, 1);
      return {scalar_product_net(rec.D, rec.eps, opts), rec, std::nullopt};
    case ConstructionKind::kDotProduct:
      rec.m = 1;
      return {dot_product_net(rec.n, rec.D, rec.eps, opts), rec, std::nullopt};
    case ConstructionKind::kMatvec:
      return {matvec_net(rec.m, rec.n, rec.D, rec.eps, opts), rec, std::nullopt};
    case ConstructionKind::kComplexMatvec:
      return {complex_matvec_net(rec.m, rec.n, rec.D, rec.eps, opts), rec, std::nullopt};
    default:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument, "unsupported construction kind");
}

}  // namespace relunet
