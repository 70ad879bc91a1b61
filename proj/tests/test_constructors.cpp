#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "relunet/calculus.hpp"
#include "relunet/constructors.hpp"
#include "relunet/data.hpp"
#include "relunet/fnn.hpp"

using namespace relunet;

namespace {

double hat(double t) { return t <= 0.5 ? 2.0 * t : 2.0 - 2.0 * t; }

// t - sum_{k<=s} g_k(t) / 4^k with g_k the k-fold hat composition.
double sawtooth_oracle(int s, double t) {
  double g = t, out = t;
  for (int k = 1; k <= s; ++k) {
    g = hat(g);
    out -= std::ldexp(g, -2 * k);
  }
  return out;
}

Vector random_vec(std::mt19937_64& gen, std::size_t n, double h) {
  std::uniform_real_distribution<double> dist(-h, h);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

double max_dev(const Vector& a, const Vector& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
  return e;
}

Matrix random_sparse_matrix(std::mt19937_64& gen, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  Matrix W(m, n);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (gen() % 3 != 0) W(r, c) = dist(gen);
  return W;
}

}  // namespace

TEST_CASE("kind and norm names round trip") {
  for (auto k : {ConstructionKind::kSquare, ConstructionKind::kScalarProduct,
                 ConstructionKind::kDotProduct, ConstructionKind::kMatvec,
                 ConstructionKind::kComplexMatvec, ConstructionKind::kAffineV1,
                 ConstructionKind::kAffineV2, ConstructionKind::kAffineV3}) {
    CHECK(parse_kind(to_string(k)) == k);
  }
  CHECK(parse_kind("complex") == ConstructionKind::kComplexMatvec);
  CHECK_FALSE(parse_kind("cube").has_value());
  CHECK(parse_norm("sobolev") == AccuracyNorm::kSobolev);
  CHECK(parse_norm(to_string(AccuracyNorm::kSup)) == AccuracyNorm::kSup);
}

TEST_CASE("sawtooth order") {
  CHECK(sawtooth_order(0.25) == 0);
  CHECK(sawtooth_order(0.2) == 1);
  CHECK(sawtooth_order(0x1p-4) == 1);
  CHECK(sawtooth_order(0x1p-5) == 2);
  CHECK(sawtooth_order(0x1p-22) == 10);
  CHECK_THROWS_AS(sawtooth_order(0.0), Error);
}

TEST_CASE("square net shape") {
  for (int s = 0; s <= 12; ++s) {
    const Fnn f = square_net_of_order(s);
    const NetworkMetrics m = metrics(f);
    CHECK(m.depth == static_cast<std::size_t>(s + 1));
    CHECK(m.max_width <= 4);
    CHECK(m.max_weight <= 4.0);
    CHECK(evaluate(f, Vector{0.0})[0] == 0.0);
  }
  for (double eps : {0.4, 0.25, 0.1, 1e-3, 1e-6}) CHECK(evaluate(square_net(eps), Vector{0.0})[0] == 0.0);
  CHECK_THROWS_AS(square_net(0.5), Error);
  CHECK_THROWS_AS(square_net(0.0), Error);
  CHECK_THROWS_AS(square_net_of_order(-1), Error);
}

TEST_CASE("square net of order zero is the identity") {
  const Fnn f = square_net(0.25);
  CHECK(f.depth() == 1);
  CHECK(evaluate(f, Vector{0.5})[0] == 0.5);
  double sup = 0.0;
  for (int j = 0; j <= 1024; ++j) {
    const double t = j / 1024.0;
    sup = std::max(sup, std::fabs(evaluate(f, Vector{t})[0] - t * t));
  }
  CHECK(sup == 0.25);
}

TEST_CASE("square net interpolates at dyadic points") {
  for (double eps : {0x1p-4, 0x1p-8, 1e-5}) {
    const Fnn f = square_net(eps);
    CHECK(evaluate(f, Vector{0.5})[0] == 0.25);
    CHECK(evaluate(f, Vector{1.0})[0] == 1.0);
  }
}

TEST_CASE("square net matches the recursive hat oracle bit for bit") {
  for (int s = 0; s <= 10; ++s) {
    const Fnn f = square_net_of_order(s);
    double sup = 0.0;
    for (int j = 0; j <= (1 << 14); ++j) {
      const double t = std::ldexp(j, -14);
      const double y = evaluate(f, Vector{t})[0];
      REQUIRE(y == sawtooth_oracle(s, t));
      sup = std::max(sup, std::fabs(y - t * t));
    }
    CHECK(sup <= std::ldexp(1.0, -2 * (s + 1)));
  }
}

TEST_CASE("square net derivative stays below 2") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const Fnn f = square_net_of_order(8);
  for (int i = 0; i < 2000; ++i) {
    const double t = dist(gen);
    CHECK(std::fabs(jacobian(f, Vector{t})(0, 0)) <= 2.0);
  }
}

TEST_CASE("scalar product vanishes on zero factors and is symmetric") {
  std::mt19937_64 gen(22);
  for (double D : {0.5, 2.0, 3.0}) {
    const Fnn f = scalar_product_net(D, 0x1p-5);
    for (int i = 0; i < 200; ++i) {
      const double x = random_vec(gen, 1, D)[0];
      const double w = random_vec(gen, 1, D)[0];
      CHECK(evaluate(f, Vector{0.0, x})[0] == 0.0);
      CHECK(evaluate(f, Vector{x, 0.0})[0] == 0.0);
      CHECK(evaluate(f, Vector{w, x}) == evaluate(f, Vector{x, w}));
    }
  }
}

TEST_CASE("scalar product on a 513 x 513 grid") {
  const double D = 2.0, eps = 0x1p-5;
  const Fnn f = scalar_product_net(D, eps);
  const NetworkMetrics m = metrics(f);
  CHECK(m.max_width <= 12);
  CHECK(m.max_weight <= 8.0);
  Evaluator ev(f);
  double sup = 0.0;
  Vector in(2);
  for (int i = 0; i <= 512; ++i) {
    in[0] = -D + 2.0 * D * i / 512.0;
    for (int j = 0; j <= 512; ++j) {
      in[1] = -D + 2.0 * D * j / 512.0;
      sup = std::max(sup, std::fabs(ev(in)[0] - in[0] * in[1]));
    }
  }
  CHECK(sup <= eps);
  CHECK(sup > 0.0);
}

TEST_CASE("dot product") {
  std::mt19937_64 gen(23);
  const double D = 2.0, eps = 0x1p-5;
  // n = 1 reduces to the scalar product.
  const Fnn one = dot_product_net(1, D, eps);
  const Fnn sp = scalar_product_net(D, eps);
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_vec(gen, 2, D);
    CHECK(std::fabs(evaluate(one, x)[0] - evaluate(sp, x)[0]) <= 1e-9);
  }

  const Fnn f = dot_product_net(4, D, eps);
  CHECK(metrics(f).max_width <= 48);
  CHECK(metrics(f).max_weight <= 8.0);
  Evaluator ev(f);
  double sup = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vector x = random_vec(gen, 8, D);
    double exact = 0.0;
    for (int k = 0; k < 4; ++k) exact += x[k] * x[4 + k];
    sup = std::max(sup, std::fabs(ev(x)[0] - exact));
  }
  CHECK(sup <= eps);

  for (int i = 0; i < 200; ++i) {
    Vector x = random_vec(gen, 8, D);
    Vector y = x;
    std::fill(x.begin(), x.begin() + 4, 0.0);
    std::fill(y.begin() + 4, y.end(), 0.0);
    CHECK(evaluate(f, x)[0] == 0.0);
    CHECK(evaluate(f, y)[0] == 0.0);
  }
}

TEST_CASE("matvec network at the real operating point") {
  std::mt19937_64 gen(24);
  const std::size_t m = 8, n = 4;
  const double D = 2.0, eps = 0x1p-5;
  const Fnn f = matvec_net(m, n, D, eps);
  CHECK(f.input_dim() == m * n + n);
  CHECK(f.output_dim() == m);
  const NetworkMetrics met = metrics(f);
  CHECK(met.max_width <= 384);
  CHECK(met.max_weight <= 8.0);
  CHECK(met.depth <= 18);

  Evaluator ev(f);
  double sup = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const Vector in = random_vec(gen, m * n + n, D);
    const auto out = ev(in);
    const Vector y(out.begin(), out.end());
    sup = std::max(sup, max_dev(y, matvec_target(in, m, n)));
  }
  CHECK(sup <= eps);

  for (int i = 0; i < 200; ++i) {
    Vector zero_w = random_vec(gen, m * n + n, D);
    Vector zero_x = zero_w;
    std::fill(zero_w.begin(), zero_w.begin() + m * n, 0.0);
    std::fill(zero_x.begin() + m * n, zero_x.end(), 0.0);
    CHECK(evaluate(f, zero_w) == Vector(m, 0.0));
    CHECK(evaluate(f, zero_x) == Vector(m, 0.0));
  }
}

TEST_CASE("matvec uses column-major packing") {
  // Exact inputs in a small dyadic set make the layout visible: swapping
  // W for its transpose would change the product.
  const Fnn f = matvec_net(2, 3, 1.0, 1e-6);
  const Matrix W{{1, 0, 0}, {0, 0, 0.5}};
  const Vector x{0.5, -1, 1};
  const Vector y = evaluate(f, pack_matvec(W, x));
  CHECK(std::fabs(y[0] - 0.5) <= 1e-6);
  CHECK(std::fabs(y[1] - 0.5) <= 1e-6);
}

TEST_CASE("complex matvec") {
  std::mt19937_64 gen(25);
  const std::size_t m = 3, n = 2;
  const double D = 3.0, eps = 0x1p-5;
  const Fnn f = complex_matvec_net(m, n, D, eps);
  CHECK(f.input_dim() == 2 * n * (m + 1));
  CHECK(f.output_dim() == 2 * m);

  double sup = 0.0;
  for (int i = 0; i < 3000; ++i) {
    const Vector in = random_vec(gen, f.input_dim(), D);
    sup = std::max(sup, max_dev(evaluate(f, in), complex_target(in, m, n)));
  }
  CHECK(sup <= eps);

  // Zero imaginary parts leave an exactly zero imaginary output.
  for (int i = 0; i < 200; ++i) {
    Vector in = random_vec(gen, f.input_dim(), D);
    std::fill(in.begin() + m * n, in.begin() + 2 * m * n, 0.0);
    std::fill(in.begin() + 2 * m * n + n, in.end(), 0.0);
    const Vector y = evaluate(f, in);
    for (std::size_t r = m; r < 2 * m; ++r) CHECK(y[r] == 0.0);
    Vector real_in(in.begin(), in.begin() + m * n);
    real_in.insert(real_in.end(), in.begin() + 2 * m * n, in.begin() + 2 * m * n + n);
    const Vector target = matvec_target(real_in, m, n);
    CHECK(max_dev(Vector(y.begin(), y.begin() + m), target) <= eps);
  }
}

TEST_CASE("complex matvec metrics at the complex operating point") {
  const Fnn f = complex_matvec_net(8, 4, 3.0, 0x1p-5);
  const NetworkMetrics met = metrics(f);
  CHECK(met.max_width <= 1536);
  CHECK(met.max_weight <= 18.0);
  CHECK(f.input_dim() == 72);
  CHECK(f.output_dim() == 16);
}

TEST_CASE("affine representations") {
  const Matrix eye = Matrix::identity(3);
  CHECK(evaluate(affine_representation(eye, 1), Vector{-1, 0, 2}) == Vector{-1, 0, 2});

  const Matrix W{{1.5, 0, -2}, {0, 3, 0.25}};
  REQUIRE(W.nonzeros() == 4);
  const Matrix W5{{1.5, 1, -2}, {0, 3, 0.25}};
  REQUIRE(W5.nonzeros() == 5);
  CHECK(metrics(affine_representation(W5, 1)).connectivity == 14);
  const Fnn v3 = affine_representation(W5, 3, 4);
  CHECK(metrics(v3).connectivity == 26);
  CHECK(v3.depth() == 4);

  std::mt19937_64 gen(26);
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_vec(gen, 3, 10.0);
    CHECK(max_dev(evaluate(v3, x), matvec(W5, x)) <= 1e-9 * 40);
  }
  CHECK_THROWS_AS(affine_representation(W, 4), Error);
  CHECK_THROWS_AS(affine_representation(W, 2, 2), Error);
  CHECK_THROWS_AS(affine_representation(Matrix(), 1), Error);
}

TEST_CASE("affine connectivity formulas and exact jacobians on random matrices") {
  std::mt19937_64 gen(27);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + gen() % 5, n = 1 + gen() % 5, K = 3 + gen() % 4;
    const Matrix W = random_sparse_matrix(gen, m, n);
    const std::size_t l0 = W.nonzeros();
    const Fnn v1 = affine_representation(W, 1);
    const Fnn v2 = affine_representation(W, 2, K);
    const Fnn v3 = affine_representation(W, 3, K);
    CHECK(metrics(v1).connectivity == 2 * l0 + 2 * m);
    CHECK(metrics(v2).connectivity == 2 * m + 2 * (K - 2) * n + 4 * l0);
    CHECK(metrics(v3).connectivity == 2 * K * m + 2 * l0);
    CHECK(v1.depth() == 2);
    CHECK(v2.depth() == K);
    CHECK(v3.depth() == K);
    for (int i = 0; i < 10; ++i) {
      const Vector x = random_vec(gen, n, 5.0);
      for (const Fnn* f : {&v1, &v2, &v3}) {
        Evaluator ev(*f);
        const auto out = ev(x);
        const Vector y(out.begin(), out.end());
        CHECK(max_dev(y, matvec(W, x)) <= 1e-12 * 100);
        if (ev.min_hidden_margin() > 0.0) CHECK(jacobian(*f, x) == W);
      }
    }
  }
}

TEST_CASE("predicted budgets") {
  BudgetConstants c2;
  const BoundBudget mv = predicted_budget(ConstructionKind::kMatvec, 8, 4, 2.0, 0x1p-5, c2);
  CHECK(mv.depth_bound == doctest::Approx(18.0).epsilon(1e-12));
  CHECK(mv.width_bound == 384.0);
  CHECK(mv.weight_bound == 8.0);

  BudgetConstants c1;
  c1.C = 1.0;
  const BoundBudget cx = predicted_budget(ConstructionKind::kComplexMatvec, 8, 4, 3.0, 0x1p-5, c1);
  CHECK(cx.depth_bound == doctest::Approx(std::log2(4.0 * 4 * 9 * 32)));
  CHECK(std::ceil(cx.depth_bound) == 13.0);
  CHECK(cx.width_bound == 1536.0);
  CHECK(cx.weight_bound == 18.0);

  CHECK(predicted_budget(ConstructionKind::kDotProduct, 1, 4, 2.0, 0x1p-5).width_bound == 48.0);
  CHECK(predicted_budget(ConstructionKind::kScalarProduct, 1, 1, 1.0, 0x1p-5).weight_bound == 4.0);
  CHECK(predicted_budget(ConstructionKind::kSquare, 1, 1, 1.0, 0x1p-5).width_bound == 4.0);
}

TEST_CASE("built networks comply with their budgets") {
  struct Case {
    ConstructionKind kind;
    std::size_t m, n;
    double D, C;
  };
  for (const Case& c : {Case{ConstructionKind::kMatvec, 8, 4, 2.0, 2.0},
                        Case{ConstructionKind::kComplexMatvec, 8, 4, 3.0, 1.0},
                        Case{ConstructionKind::kDotProduct, 1, 4, 2.0, 2.0},
                        Case{ConstructionKind::kScalarProduct, 1, 1, 3.0, 2.0},
                        Case{ConstructionKind::kSquare, 1, 1, 1.0, 2.0}}) {
    ConstructionRecord rec;
    rec.kind = c.kind;
    rec.m = c.m;
    rec.n = c.n;
    rec.D = c.D;
    rec.eps = 0x1p-5;
    const BuiltNetwork b = build_network(rec);
    BudgetConstants k;
    k.C = c.C;
    const BoundBudget budget = predicted_budget(c.kind, b.record.m, b.record.n, c.D, 0x1p-5, k);
    const NetworkMetrics met = metrics(b.fnn);
    CHECK(static_cast<double>(met.max_width) <= budget.width_bound);
    CHECK(met.max_weight <= budget.weight_bound);
    CHECK(static_cast<double>(met.depth) <= std::ceil(budget.depth_bound));
  }
}

TEST_CASE("build_network validates and records parameters") {
  ConstructionRecord rec;
  rec.kind = ConstructionKind::kMatvec;
  rec.m = 2;
  rec.n = 3;
  rec.D = 1.0;
  rec.eps = 0.7;
  try {
    build_network(rec);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  rec.eps = 0.0;
  CHECK_THROWS_AS(build_network(rec), Error);
  rec.eps = 0x1p-4;
  rec.D = -1.0;
  CHECK_THROWS_AS(build_network(rec), Error);
  rec.D = 1.0;
  rec.m = 0;
  CHECK_THROWS_AS(build_network(rec), Error);
  rec.m = 2;

  const BuiltNetwork b = build_network(rec);
  CHECK(b.fnn.input_dim() == 9);
  CHECK(b.fnn.output_dim() == 2);
  CHECK(b.record.sawtooth_order == scalar_product_order(1.0, 0x1p-4 / 3.0));
  CHECK_FALSE(b.record.input_packing.empty());
  CHECK_FALSE(b.matrix.has_value());

  BuildOptions trunc;
  trunc.sawtooth_override = b.record.sawtooth_order - 1;
  const BuiltNetwork t = build_network(rec, trunc);
  CHECK(t.record.sawtooth_order == b.record.sawtooth_order - 1);
  CHECK(t.fnn.depth() + 1 == b.fnn.depth());

  BuildOptions sob;
  sob.norm = AccuracyNorm::kSobolev;
  const BuiltNetwork s = build_network(rec, sob);
  CHECK(s.record.norm == AccuracyNorm::kSobolev);
  CHECK(s.record.sawtooth_order >= b.record.sawtooth_order);

  rec.kind = ConstructionKind::kAffineV2;
  rec.m = 3;
  rec.n = 4;
  rec.D = 2.0;
  rec.depth = 5;
  rec.seed = 9;
  const BuiltNetwork a = build_network(rec);
  REQUIRE(a.matrix.has_value());
  CHECK(*a.matrix == random_affine_matrix(3, 4, 2.0, 9));
  CHECK(a.fnn.depth() == 5);
  CHECK(a.matrix->max_abs() <= 2.0);
}

TEST_CASE("random affine matrices lie on the grid and contain zeros") {
  const Matrix W = random_affine_matrix(20, 20, 2.0, 3);
  std::size_t zeros = 0;
  for (double v : W.data()) {
    if (v == 0.0) ++zeros;
    const double j = (v + 2.0) * 1024.0 / 4.0;
    CHECK(j == std::round(j));
    CHECK(std::fabs(v) <= 2.0);
  }
  CHECK(zeros > 40);
  CHECK(zeros < 200);
  CHECK(random_affine_matrix(20, 20, 2.0, 3) == W);
  CHECK_FALSE(random_affine_matrix(20, 20, 2.0, 4) == W);
}
