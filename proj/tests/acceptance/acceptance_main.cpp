// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every criterion also produces CSV rows; the last criterion reruns
// all of them with other thread counts and demands byte-identical rows.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relunet/calculus.hpp"
#include "relunet/constructors.hpp"
#include "relunet/data.hpp"
#include "relunet/fnn.hpp"
#include "relunet/report.hpp"
#include "relunet/verification.hpp"

using namespace relunet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<CsvRow> rows;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
    }
  }
  void note(const std::string& text) { info += (info.empty() ? "" : ", ") + text; }
  std::string info;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

SamplingOptions sampling(std::size_t samples, std::uint64_t seed, unsigned jobs) {
  SamplingOptions o;
  o.samples = samples;
  o.seed = seed;
  o.jobs = jobs;
  return o;
}

ConstructionRecord record(ConstructionKind kind, std::size_t m, std::size_t n, double D,
                          double eps) {
  ConstructionRecord r;
  r.kind = kind;
  r.m = m;
  r.n = n;
  r.D = D;
  r.eps = eps;
  return r;
}

// Real matrix-vector product on [-2, 2] at eps = 2^-5.
Outcome criterion_matvec(std::uint64_t seed, unsigned jobs) {
  Outcome o;
  const std::size_t m = 8, n = 4;
  const double D = 2.0, eps = 0x1p-5;
  const BuiltNetwork built = build_network(record(ConstructionKind::kMatvec, m, n, D, eps));
  const BudgetCompliance budget =
      check_budget(built.fnn, predicted_budget(ConstructionKind::kMatvec, m, n, D, eps));

  const ErrorReport uniform = sup_error_matvec(built.fnn, m, n, D, sampling(100000, seed, jobs));
  const Dataset grid = equispaced_real_dataset(m, n, 100000, D, 1025, seed);
  const ErrorReport on_grid = error_on_dataset(built.fnn, grid, jobs);

  const NetworkMetrics& a = budget.actual;
  o.require(uniform.sup_error <= eps, "sup " + num(uniform.sup_error) + " > 2^-5");
  o.require(uniform.mse <= 0x1p-10, "mse " + num(uniform.mse) + " > 2^-10");
  o.require(on_grid.sup_error <= eps, "grid sup " + num(on_grid.sup_error) + " > 2^-5");
  o.require(on_grid.mse <= 0x1p-10, "grid mse " + num(on_grid.mse) + " > 2^-10");
  o.require(a.max_width <= 384, "W " + std::to_string(a.max_width) + " > 384");
  o.require(a.max_weight <= 8.0, "B " + num(a.max_weight) + " > 8");
  o.require(a.depth <= 18, "L " + std::to_string(a.depth) + " > 18");
  o.require(budget.ok(), "budget compliance");
  o.note("sup " + num(uniform.sup_error) + ", mse " + num(uniform.mse) + ", grid sup " +
         num(on_grid.sup_error) + ", L " + std::to_string(a.depth) + ", W " +
         std::to_string(a.max_width) + ", B " + num(a.max_weight));
  o.rows.push_back(make_row(built.record, uniform, budget));
  o.rows.push_back(make_row(built.record, on_grid, budget));
  return o;
}

// Complex product on clipped QPSK/Rayleigh samples, depth constant C = 1.
Outcome criterion_complex(std::uint64_t seed, unsigned jobs) {
  Outcome o;
  const std::size_t m = 8, n = 4;
  const double D = 3.0, eps = 0x1p-5;
  const BuiltNetwork built =
      build_network(record(ConstructionKind::kComplexMatvec, m, n, D, eps));
  BudgetConstants c;
  c.C = 1.0;
  const BudgetCompliance budget = check_budget(
      built.fnn, predicted_budget(ConstructionKind::kComplexMatvec, m, n, D, eps, c));

  const Dataset ds = qpsk_rayleigh_dataset(m, n, 100000, seed);
  const ErrorReport rep = error_on_dataset(built.fnn, ds, jobs);

  const NetworkMetrics& a = budget.actual;
  o.require(rep.sup_error <= eps, "sup " + num(rep.sup_error) + " > 2^-5");
  o.require(rep.mse <= 0x1p-10, "mse " + num(rep.mse) + " > 2^-10");
  o.require(a.max_width <= 1536, "W " + std::to_string(a.max_width) + " > 1536");
  o.require(a.max_weight <= 18.0, "B " + num(a.max_weight) + " > 18");
  o.require(a.depth <= 13, "L " + std::to_string(a.depth) + " > 13");
  o.require(budget.ok(), "budget compliance");
  o.note("sup " + num(rep.sup_error) + ", mse " + num(rep.mse) + ", L " +
         std::to_string(a.depth) + ", W " + std::to_string(a.max_width) + ", B " +
         num(a.max_weight) + ", clipped entries " + std::to_string(ds.meta.clipped_entries));
  o.rows.push_back(make_row(built.record, rep, budget));
  return o;
}

// Square-net error curve against 2^{-2(m+1)}.
Outcome criterion_square_curve(std::uint64_t, unsigned) {
  Outcome o;
  const auto curve = square_error_curve(10);
  o.require(curve.size() == 11, "curve has 11 points");
  double worst = 0.0;
  for (const CurvePoint& p : curve) {
    const double target = std::ldexp(1.0, -2 * (p.order + 1));
    const double dev = std::fabs(p.sup_error - target);
    worst = std::max(worst, dev);
    o.require(dev <= 1e-12, "order " + std::to_string(p.order) + " deviates by " + num(dev));

    const Fnn f = square_net_of_order(p.order);
    CsvRow row;
    row.kind = "square";
    row.m = row.n = 1;
    row.D = 1.0;
    row.eps = target;
    row.samples = kCurveGridPoints;
    row.sup_error = p.sup_error;
    row.mse = p.mse;
    row.metrics = metrics(f);
    row.sawtooth_order = p.order;
    o.rows.push_back(row);
  }
  o.note("orders 0..10, max deviation from 2^-2(m+1) " + num(worst));
  return o;
}

// Exact affine representations of 50 random sparse matrices.
Outcome criterion_affine(std::uint64_t seed, unsigned jobs) {
  Outcome o;
  std::mt19937_64 gen(seed);
  double worst = 0.0;
  std::size_t networks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + gen() % 8, n = 1 + gen() % 8, K = 3 + gen() % 5;
    const double D = 0.5 + static_cast<double>(gen() % 8);
    const std::uint64_t wseed = gen();
    for (const ConstructionKind kind :
         {ConstructionKind::kAffineV1, ConstructionKind::kAffineV2, ConstructionKind::kAffineV3}) {
      ConstructionRecord rec = record(kind, m, n, D, 0.0);
      rec.depth = K;
      rec.seed = wseed;
      const BuiltNetwork built = build_network(rec);
      const Matrix& W = *built.matrix;
      const std::size_t l0 = W.nonzeros();
      const NetworkMetrics got = metrics(built.fnn);

      std::size_t M = 0, L = 0;
      if (kind == ConstructionKind::kAffineV1) {
        M = 2 * l0 + 2 * m;
        L = 2;
      } else if (kind == ConstructionKind::kAffineV2) {
        M = 2 * m + 2 * (K - 2) * n + 4 * l0;
        L = K;
      } else {
        M = 2 * K * m + 2 * l0;
        L = K;
      }
      const std::string tag = std::string(to_string(kind)) + " trial " + std::to_string(trial);
      o.require(got.connectivity == M, tag + " M " + std::to_string(got.connectivity) +
                                           " != " + std::to_string(M));
      o.require(got.depth == L, tag + " depth");

      std::uniform_real_distribution<double> dist(-D, D);
      Evaluator ev(built.fnn);
      for (int i = 0; i < 100; ++i) {
        Vector x(n);
        for (double& v : x) v = dist(gen);
        const Vector ref = matvec(W, x);
        const auto out = ev(x);
        for (std::size_t r = 0; r < m; ++r) {
          const double rel = std::fabs(out[r] - ref[r]) / std::max(1.0, std::fabs(ref[r]));
          worst = std::max(worst, rel);
        }
      }

      BudgetConstants c;
      c.affine_depth = K;
      const BudgetCompliance budget =
          check_budget(built.fnn, predicted_budget(kind, m, n, D, 0.0, c));
      const ErrorReport rep = error_affine(built.fnn, W, D, sampling(100, wseed, jobs), true);
      o.require(rep.grad_sup_error.value_or(1.0) <= 1e-9, tag + " jacobian");
      o.rows.push_back(make_row(built.record, rep, budget));
      ++networks;
    }
  }
  o.require(worst <= 1e-9, "relative deviation " + num(worst));
  o.note(std::to_string(networks) + " networks, 100 inputs each, max relative deviation " +
         num(worst) + ", all connectivities equal the closed forms");
  return o;
}

// Randomized calculus: metric identities and soundness of each operator.
Outcome criterion_calculus(std::uint64_t seed, unsigned) {
  Outcome o;
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto random_net = [&](std::size_t in, std::size_t out, std::size_t depth) {
    std::vector<std::size_t> widths{in};
    for (std::size_t k = 1; k < depth; ++k) widths.push_back(1 + gen() % 5);
    widths.push_back(out);
    std::vector<Layer> layers;
    for (std::size_t k = 1; k < widths.size(); ++k) {
      Matrix w(widths[k], widths[k - 1]);
      for (std::size_t r = 0; r < w.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = unit(gen);
      Vector b(widths[k]);
      for (double& v : b) v = unit(gen);
      layers.push_back({std::move(w), std::move(b)});
    }
    return Fnn(std::move(layers));
  };
  const auto random_vec = [&](std::size_t n) {
    Vector v(n);
    for (double& x : v) x = 100.0 * unit(gen);
    return v;
  };
  double worst = 0.0;
  // Relative deviation against the scale of the terms that were combined.
  const auto track = [&](const Vector& got, const Vector& want, const Vector& scale) {
    if (got.size() != want.size()) {
      worst = INFINITY;
      return;
    }
    for (std::size_t i = 0; i < got.size(); ++i)
      worst = std::max(worst, std::fabs(got[i] - want[i]) / std::max(1.0, scale[i]));
  };
  const auto abs_of = [](Vector v) {
    for (double& x : v) x = std::fabs(x);
    return v;
  };

  std::size_t trials = 0, identity_failures = 0;
  const auto identity = [&](bool ok) { identity_failures += ok ? 0 : 1; };
  for (int t = 0; t < 50; ++t) {
    const std::size_t in = 1 + gen() % 4, mid = 1 + gen() % 4, out = 1 + gen() % 3;
    const std::size_t k1 = 1 + gen() % 4, k2 = 1 + gen() % 4;

    {  // concatenation
      const Fnn inner = random_net(in, mid, k2);
      const Fnn outer = random_net(mid, out, k1);
      const Fnn c = concatenate(outer, inner);
      identity(c.depth() == k1 + k2 - 1);
      identity(metrics(c).neurons == metrics(outer).neurons + metrics(inner).neurons - 2 * mid);
      for (int i = 0; i < 5; ++i) {
        const Vector x = random_vec(in);
        const Vector want = evaluate(outer, evaluate(inner, x));
        track(evaluate(c, x), want, abs_of(want));
      }
      ++trials;
    }
    {  // identity network
      const Fnn id = identity_fnn(in, k1 + 1);
      identity(metrics(id).connectivity == 2 * in * (k1 + 1));
      const Vector x = random_vec(in);
      identity(evaluate(id, x) == x);
      ++trials;
    }
    {  // depth matching preserves the function
      const Fnn f = random_net(in, out, k1);
      const Fnn g = match_depth(f, k1 + k2);
      identity(g.depth() == k1 + k2);
      for (int i = 0; i < 5; ++i) {
        const Vector x = random_vec(in);
        const Vector want = evaluate(f, x);
        track(evaluate(g, x), want, abs_of(want));
      }
      ++trials;
    }
    {  // shared-input parallelization
      const std::size_t count = 1 + gen() % 3;
      std::vector<Fnn> parts;
      for (std::size_t i = 0; i < count; ++i) parts.push_back(random_net(in, 1 + gen() % 3, k1 + 1));
      const Fnn p = parallelize_shared(parts);
      std::size_t m_sum = 0, n_sum = 0;
      for (const Fnn& f : parts) {
        m_sum += metrics(f).connectivity;
        n_sum += metrics(f).neurons;
      }
      identity(metrics(p).connectivity == m_sum);
      identity(metrics(p).neurons == n_sum - (count - 1) * in);
      for (int i = 0; i < 5; ++i) {
        const Vector x = random_vec(in);
        Vector want;
        for (const Fnn& f : parts) {
          const Vector y = evaluate(f, x);
          want.insert(want.end(), y.begin(), y.end());
        }
        track(evaluate(p, x), want, abs_of(want));
      }
      ++trials;
    }
    {  // scalar superposition, shared and disjoint inputs
      const std::size_t count = 1 + gen() % 3;
      std::vector<Fnn> parts;
      for (std::size_t i = 0; i < count; ++i) parts.push_back(random_net(in, 1, 1 + gen() % 4));
      Vector a;
      for (std::size_t i = 0; i < count; ++i) a.push_back(2.0 * unit(gen));
      std::size_t K = 0;
      for (const Fnn& f : parts) K = std::max(K, f.depth());
      for (const bool shared : {true, false}) {
        const Fnn s = superpose(parts, a, shared);
        identity(s.depth() == K);
        std::size_t bound = 0;
        for (const Fnn& f : parts) {
          const NetworkMetrics mf = metrics(f);
          bound += mf.connectivity + mf.max_width + 2 * (K - f.depth()) + 1;
        }
        identity(metrics(s).connectivity <= bound);
        for (int i = 0; i < 5; ++i) {
          Vector x;
          double want = 0.0, scale = 0.0;
          for (std::size_t j = 0; j < count; ++j) {
            const Vector xj = shared ? (x.empty() ? random_vec(in) : x) : random_vec(in);
            const double term = a[j] * evaluate(parts[j], xj)[0];
            want += term;
            scale += std::fabs(term);
            if (!shared || x.empty()) x.insert(x.end(), xj.begin(), xj.end());
          }
          track(evaluate(s, x), Vector{want}, Vector{scale});
        }
      }
      ++trials;
    }
  }
  o.require(trials >= 200, "only " + std::to_string(trials) + " trials");
  o.require(identity_failures == 0, std::to_string(identity_failures) + " metric identities");
  o.require(worst <= 1e-9, "relative deviation " + num(worst));
  o.note(std::to_string(trials) + " trials, max relative deviation " + num(worst));

  CsvRow row;
  row.kind = "calculus";
  row.samples = trials;
  row.seed = seed;
  row.sup_error = worst;
  row.budget_ok = row.width_ok = row.weight_ok = row.depth_ok = identity_failures == 0;
  o.rows.push_back(row);
  return o;
}

// Sobolev accuracy at small scale and the square-net derivative bound.
Outcome criterion_sobolev(std::uint64_t seed, unsigned jobs) {
  Outcome o;
  const std::size_t m = 2, n = 2;
  const double D = 1.0, eps = 0x1p-4;
  ConstructionRecord rec = record(ConstructionKind::kMatvec, m, n, D, eps);
  rec.norm = AccuracyNorm::kSobolev;
  BuildOptions opts;
  opts.norm = AccuracyNorm::kSobolev;
  const BuiltNetwork built = build_network(rec, opts);
  const BudgetCompliance budget = check_budget(
      built.fnn,
      predicted_budget(ConstructionKind::kMatvec, m, n, D, eps, {}, AccuracyNorm::kSobolev));
  const ErrorReport rep = sobolev_error_matvec(built.fnn, m, n, D, sampling(10000, seed, jobs));
  const double grad = rep.grad_sup_error.value_or(INFINITY);
  o.require(std::max(rep.sup_error, grad) <= eps,
            "max(value, gradient) " + num(std::max(rep.sup_error, grad)) + " > 2^-4");
  o.rows.push_back(make_row(built.record, rep, budget));

  double max_derivative = 0.0;
  for (int s = 0; s <= 10; ++s) {
    const Fnn f = square_net_of_order(s);
    const SquareDerivativeReport d = square_derivative_check(f, sampling(10000, seed + s, jobs));
    max_derivative = std::max(max_derivative, d.max_abs_derivative);
    o.require(d.max_abs_derivative <= 2.0, "order " + std::to_string(s) + " derivative " +
                                               num(d.max_abs_derivative));
    CsvRow row;
    row.kind = "square";
    row.m = row.n = 1;
    row.D = 1.0;
    row.eps = std::ldexp(1.0, -2 * (s + 1));
    row.samples = d.sample_count;
    row.seed = seed + s;
    row.sup_error = d.sup_error;
    row.mse = d.mse;
    row.grad_sup_error = d.max_abs_derivative;
    row.metrics = metrics(f);
    row.sawtooth_order = s;
    o.rows.push_back(row);
  }
  o.note("value " + num(rep.sup_error) + ", gradient " + num(grad) + ", skipped " +
         std::to_string(rep.skipped_count) + ", sawtooth order " +
         std::to_string(built.record.sawtooth_order) + ", square-net max |f'| " +
         num(max_derivative));
  return o;
}

using Criterion = std::function<Outcome(std::uint64_t, unsigned)>;

struct Named {
  const char* name;
  Criterion run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::uint64_t seed = 20240601;
  std::string csv_path;
  app.add_option("--seed", seed, "Base seed for every sampled check");
  app.add_option("--csv", csv_path, "Write the single-thread result rows here");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Named> criteria{
      {"real matrix-vector product (8x4, D=2, eps=2^-5)", criterion_matvec},
      {"complex matrix-vector product on QPSK/Rayleigh (8x4, D=3, eps=2^-5)", criterion_complex},
      {"square-net error curve 2^-2(m+1)", criterion_square_curve},
      {"exact affine representations", criterion_affine},
      {"randomized calculus identities and soundness", criterion_calculus},
      {"Sobolev accuracy and square-net derivative", criterion_sobolev},
  };

  bool all = true;
  std::vector<std::vector<CsvRow>> baseline;
  const auto report = [&](std::size_t id, const char* name, bool pass, const std::string& text,
                          double seconds) {
    all = all && pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " ["
              << text << "] (" << num(seconds) << " s)" << std::endl;
  };

  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run(seed, 1);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(i + 1, criteria[i].name, o.pass, o.detail.empty() ? o.info : o.detail + "; " + o.info,
           dt);
    baseline.push_back(o.rows);
  }

  // Rerun everything with other thread counts; 0 means all hardware threads.
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool same = true;
    std::string diff;
    std::size_t compared = 0;
    for (const unsigned jobs : {0u, 3u}) {
      for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::vector<CsvRow> rows;
        try {
          rows = criteria[i].run(seed, jobs).rows;
        } catch (const std::exception& e) {
          same = false;
          diff += " criterion " + std::to_string(i + 1) + " threw: " + e.what();
          continue;
        }
        if (rows.size() != baseline[i].size()) {
          same = false;
          diff += " criterion " + std::to_string(i + 1) + " row count differs";
          continue;
        }
        for (std::size_t r = 0; r < rows.size(); ++r, ++compared) {
          if (to_csv(rows[r]) != to_csv(baseline[i][r])) {
            same = false;
            diff += " criterion " + std::to_string(i + 1) + " row " + std::to_string(r) +
                    " differs at jobs=" + std::to_string(jobs);
          }
        }
      }
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(7, "CSV rows reproducible across thread counts (1 vs 0 and 3)", same,
           same ? std::to_string(compared) + " rows compared byte for byte, hardware threads " +
                      std::to_string(std::thread::hardware_concurrency())
                : diff,
           dt);
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    out << csv_header() << '\n';
    for (const auto& rows : baseline)
      for (const CsvRow& r : rows) out << to_csv(r) << '\n';
    if (!out) {
      std::cerr << "could not write " << csv_path << '\n';
      return 3;
    }
  }

  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED") << std::endl;
  return all ? 0 : 1;
}
