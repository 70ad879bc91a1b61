#include "relunet/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "relunet/constructors.hpp"
#include "relunet/data.hpp"
#include "relunet/error.hpp"
#include "relunet/report.hpp"
#include "relunet/serialization.hpp"
#include "relunet/verification.hpp"

namespace relunet {

namespace {

// Carries an exit code out of a subcommand.
struct Exit {
  int code;
  std::string message;
};

[[noreturn]] void usage(const std::string& what) { throw Exit{kExitUsage, what}; }

double parse_eps(const std::string& text) {
  try {
    return parse_double(text);
  } catch (const Error&) {
    usage("--eps: expected a decimal or 2^-k literal, got '" + text + "'");
  }
}

void append_csv(const std::string& path, const CsvRow& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Exit{kExitIo, "cannot open '" + path + "' for appending"};
  if (fresh) out << csv_header() << '\n';
  out << to_csv(row) << '\n';
  if (!out) throw Exit{kExitIo, "failed writing '" + path + "'"};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Exit{kExitIo, "cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw Exit{kExitIo, "failed writing '" + path + "'"};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_budget(std::ostream& out, const BudgetCompliance& c) {
  const auto line = [&](const char* name, const std::string& actual, const std::string& bound,
                        std::optional<bool> ok) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-2s %12s   bound %12s   %s\n", name, actual.c_str(),
                  bound.c_str(), ok ? (*ok ? "ok" : "VIOLATED") : "-");
    out << buf;
  };
  const NetworkMetrics& a = c.actual;
  const BoundBudget& b = c.budget;
  line("L", std::to_string(a.depth), fmt(b.depth_bound), c.depth_ok);
  line("W", std::to_string(a.max_width), fmt(b.width_bound), c.width_ok);
  line("B", fmt(a.max_weight), fmt(b.weight_bound), c.weight_ok);
  line("M", std::to_string(a.connectivity),
       b.connectivity_bound ? fmt(*b.connectivity_bound) : "-", c.connectivity_ok);
  line("N", std::to_string(a.neurons), b.neuron_bound ? fmt(*b.neuron_bound) : "-",
       c.neurons_ok);
}

struct BuildArgs {
  std::string kind;
  std::size_t m = 1, n = 1;
  double D = 1.0;
  std::string eps = "0.25";
  double C = 2.0;
  std::uint64_t seed = 0;
  std::string out;
  bool sobolev = false;
  std::optional<int> sawtooth;
  std::size_t depth = 3;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  const auto kind = parse_kind(a.kind);
  if (!kind) usage("unknown --kind '" + a.kind + "'");
  ConstructionRecord rec;
  rec.kind = *kind;
  rec.m = a.m;
  rec.n = a.n;
  rec.D = a.D;
  rec.eps = parse_eps(a.eps);
  rec.seed = a.seed;
  rec.depth = a.depth;
  BuildOptions opts;
  opts.norm = a.sobolev ? AccuracyNorm::kSobolev : AccuracyNorm::kSup;
  opts.sawtooth_override = a.sawtooth;

  BuiltNetwork built = [&] {
    try {
      return build_network(rec, opts);
    } catch (const Error& e) {
      usage(e.what());
    }
  }();
  BudgetConstants constants;
  constants.C = a.C;
  constants.affine_depth = built.record.depth;
  const nlohmann::json meta = network_meta(built, constants);
  if (!a.out.empty()) {
    try {
      save_network(a.out, built.fnn, meta);
    } catch (const Error& e) {
      throw Exit{kExitIo, e.what()};
    }
  }

  const ConstructionRecord& r = built.record;
  const BoundBudget budget =
      predicted_budget(r.kind, r.m, r.n, r.D, r.eps, constants, r.norm);
  const BudgetCompliance c = check_budget(built.fnn, budget);
  out << to_string(r.kind) << "  m=" << r.m << " n=" << r.n << " D=" << fmt(r.D)
      << " eps=" << fmt(r.eps) << " sawtooth_order=" << r.sawtooth_order
      << " norm=" << to_string(r.norm) << "\n  input: " << r.input_packing << '\n';
  print_budget(out, c);
  if (!a.out.empty()) out << "written to " << a.out << '\n';
  return c.ok() ? kExitOk : kExitBoundViolated;
}

struct VerifyArgs {
  std::string network;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool sobolev = false;
  double C = 2.0;
  std::string csv;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  NetworkFile file = [&] {
    try {
      return load_network(a.network);
    } catch (const Error& e) {
      usage(e.what());
    }
  }();
  ConstructionRecord rec;
  try {
    rec = record_from_json(file.meta);
  } catch (const Error& e) {
    usage(e.what());
  }
  const Fnn& f = file.fnn;
  SamplingOptions opts;
  opts.samples = a.samples;
  opts.seed = a.seed;
  opts.jobs = a.jobs;

  ErrorReport rep;
  double tolerance = rec.eps;
  std::string extra;
  try {
    switch (rec.kind) {
      case ConstructionKind::kSquare: {
        const SquareDerivativeReport s = square_derivative_check(f, opts);
        rep.sup_error = s.sup_error;
        rep.mse = s.mse;
        rep.sample_count = s.sample_count;
        rep.skipped_count = s.skipped_count;
        rep.seed = a.seed;
        rep.domain_half_width = 1.0;
        if (a.sobolev) rep.grad_sup_error = s.max_derivative_error;
        extra = "  max |f'| on (0,1): " + fmt(s.max_abs_derivative) + '\n';
        break;
      }
      case ConstructionKind::kScalarProduct:
      case ConstructionKind::kDotProduct:
      case ConstructionKind::kMatvec:
        rep = a.sobolev ? sobolev_error_matvec(f, rec.m, rec.n, rec.D, opts)
                        : sup_error_matvec(f, rec.m, rec.n, rec.D, opts);
        break;
      case ConstructionKind::kComplexMatvec:
        if (a.sobolev) usage("--sobolev is not available for complex_matvec networks");
        if (rec.D >= 1.0) {
          QpskOptions q;
          q.clip = std::min(3.0, rec.D);
          const Dataset ds = qpsk_rayleigh_dataset(rec.m, rec.n, a.samples, a.seed, q);
          rep = error_on_dataset(f, ds, a.jobs);
          rep.domain_half_width = rec.D;
          extra = "  samples: clipped QPSK/Rayleigh, clip " + fmt(q.clip) + ", " +
                  std::to_string(ds.meta.clipped_entries) + " entries clipped\n";
        } else {
          rep = sup_error_complex(f, rec.m, rec.n, rec.D, opts);
        }
        break;
      default: {
        if (!file.meta.contains("matrix")) usage("affine network file has no matrix in meta");
        const auto rows = file.meta.at("matrix").get<std::vector<Vector>>();
        const Matrix W = Matrix::from_rows(rows, rows.empty() ? 0 : rows.front().size());
        rep = error_affine(f, W, rec.D, opts, a.sobolev);
        tolerance = 1e-9 * std::max(1.0, rec.D * rec.D * static_cast<double>(rec.n));
        break;
      }
    }
  } catch (const Error& e) {
    usage(e.what());
  } catch (const nlohmann::json::exception& e) {
    usage(std::string("network meta: ") + e.what());
  }

  BudgetConstants constants;
  constants.C = a.C;
  constants.affine_depth = rec.depth;
  const BudgetCompliance c = check_budget(
      f, predicted_budget(rec.kind, rec.m, rec.n, rec.D, rec.eps, constants, rec.norm));

  const bool value_ok = rep.sup_error <= tolerance;
  const bool grad_ok = !rep.grad_sup_error || *rep.grad_sup_error <= tolerance;
  out << to_string(rec.kind) << "  m=" << rec.m << " n=" << rec.n << " D=" << fmt(rec.D)
      << " eps=" << fmt(rec.eps) << " samples=" << rep.sample_count << " seed=" << rep.seed
      << '\n';
  out << "  sup_error " << format_double(rep.sup_error) << (value_ok ? "  ok" : "  EXCEEDS eps")
      << "\n  mse       " << format_double(rep.mse) << '\n';
  if (rep.grad_sup_error) {
    out << "  grad_err  " << format_double(*rep.grad_sup_error)
        << (grad_ok ? "  ok" : "  EXCEEDS eps") << '\n';
  }
  if (rep.skipped_count) out << "  skipped near kinks: " << rep.skipped_count << '\n';
  out << extra;
  print_budget(out, c);
  if (!a.csv.empty()) append_csv(a.csv, make_row(rec, rep, c));
  return value_ok && grad_ok ? kExitOk : kExitBoundViolated;
}

struct DataArgs {
  std::string kind;
  std::size_t m = 8, n = 4, count = 1000;
  std::uint64_t seed = 0;
  double D = 2.0;
  std::size_t grid_points = 1025;
  double clip = 3.0;
  double variance = 0.5;
  bool zero_probe = false;
  std::string out;
  bool json = false;
};

int cmd_data(const DataArgs& a, std::ostream& out) {
  Dataset ds;
  try {
    if (a.kind == "equispaced" || a.kind == "equispaced_real" || a.kind == "real") {
      ds = equispaced_real_dataset(a.m, a.n, a.count, a.D, a.grid_points, a.seed);
    } else if (a.kind == "qpsk" || a.kind == "qpsk_rayleigh") {
      QpskOptions q;
      q.clip = a.clip;
      q.component_variance = a.variance;
      q.zero_channel_probe = a.zero_probe;
      ds = qpsk_rayleigh_dataset(a.m, a.n, a.count, a.seed, q);
    } else {
      usage("unknown dataset kind '" + a.kind + "' (expected equispaced or qpsk)");
    }
  } catch (const Error& e) {
    usage(e.what());
  }
  const bool json = a.json || a.out.ends_with(".json");
  std::string text;
  if (json) {
    text = dataset_to_json(ds);
  } else {
    std::ostringstream s;
    write_csv(ds, s);
    text = s.str();
  }
  if (a.out.empty()) {
    out << text;
    return kExitOk;
  }
  write_text(a.out, text);
  out << ds.meta.kind << ": " << ds.size() << " samples, input width "
      << ds.inputs.front().size() << ", target width " << ds.targets.front().size();
  if (ds.meta.kind == "qpsk_rayleigh") out << ", " << ds.meta.clipped_entries << " entries clipped";
  out << "\nwritten to " << a.out << '\n';
  return kExitOk;
}

struct CurveArgs {
  int max_order = 10;
  std::string csv;
  std::string svg;
};

int cmd_curve(const CurveArgs& a, std::ostream& out) {
  std::vector<CurvePoint> curve;
  try {
    curve = square_error_curve(a.max_order);
  } catch (const Error& e) {
    usage(e.what());
  }
  std::vector<CsvRow> rows;
  bool all_match = true;
  for (const CurvePoint& p : curve) {
    ConstructionRecord rec;
    rec.kind = ConstructionKind::kSquare;
    rec.eps = std::ldexp(1.0, -2 * (p.order + 1));
    rec.sawtooth_order = p.order;
    ErrorReport rep;
    rep.sup_error = p.sup_error;
    rep.mse = p.mse;
    rep.sample_count = kCurveGridPoints;
    const Fnn f = square_net_of_order(p.order);
    const BoundBudget b = predicted_budget(ConstructionKind::kSquare, 1, 1, 1.0, rec.eps);
    rows.push_back(make_row(rec, rep, check_budget(f, b)));
    all_match = all_match && std::fabs(p.sup_error - rec.eps) <= 1e-12;
  }
  out << summary_table(rows);
  out << (all_match ? "every order matches 2^-2(s+1)\n" : "MISMATCH against 2^-2(s+1)\n");
  if (!a.csv.empty()) {
    for (const CsvRow& r : rows) append_csv(a.csv, r);
  }
  if (!a.svg.empty()) write_text(a.svg, error_curve_svg(rows));
  return all_match ? kExitOk : kExitBoundViolated;
}

struct ReportArgs {
  std::vector<std::string> files;
  std::string svg;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (a.files.empty()) usage("report needs at least one CSV file");
  std::vector<CsvRow> rows;
  for (const std::string& path : a.files) {
    std::ifstream in(path);
    if (!in) usage("cannot read '" + path + "'");
    try {
      auto part = read_csv_rows(in);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const Error& e) {
      usage(path + ": " + e.what());
    }
  }
  out << summary_table(rows);
  if (!a.svg.empty()) {
    write_text(a.svg, error_curve_svg(rows));
    out << "plot written to " << a.svg << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explicit deep ReLU network constructions for products and matrix-vector maps"};
  app.name("relunet");
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "construct a network and report its size budget");
  b->add_option("--kind", build.kind,
                "square, scalar_product, dot_product, matvec, complex_matvec, affine_v1..3")
      ->required();
  b->add_option("--m", build.m, "rows of W");
  b->add_option("--n", build.n, "columns of W / length of x");
  b->add_option("--D", build.D, "half width of the input domain");
  b->add_option("--eps", build.eps, "target accuracy, decimal or 2^-k");
  b->add_option("--C", build.C, "depth constant of the budget");
  b->add_option("--seed", build.seed, "seed for the affine kinds' random W");
  b->add_option("--out", build.out, "network file to write");
  b->add_flag("--sobolev", build.sobolev, "size the sawtooth for derivative accuracy too");
  b->add_option("--sawtooth-order", build.sawtooth, "force the sawtooth order");
  b->add_option("--depth", build.depth, "depth K of affine_v2 / affine_v3");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "estimate the error of a saved network");
  v->add_option("network", verify.network, "network file")->required();
  v->add_option("--samples", verify.samples, "random samples");
  v->add_option("--seed", verify.seed, "sampling seed");
  v->add_option("--jobs", verify.jobs, "worker threads (0 = all cores)");
  v->add_flag("--sobolev", verify.sobolev, "also check first derivatives");
  v->add_option("--C", verify.C, "depth constant of the budget");
  v->add_option("--csv", verify.csv, "append a result row to this CSV file");

  DataArgs data;
  auto* d = app.add_subcommand("data", "generate a verification dataset");
  d->add_option("kind,--kind", data.kind, "equispaced or qpsk")->required();
  d->add_option("--m", data.m, "rows of W");
  d->add_option("--n", data.n, "columns of W");
  d->add_option("--count,--samples", data.count, "number of samples");
  d->add_option("--seed", data.seed, "generation seed");
  d->add_option("--D", data.D, "half width of the equispaced grid");
  d->add_option("--grid-points", data.grid_points, "points of the equispaced grid");
  d->add_option("--clip", data.clip, "clip level of the Gaussian channel entries");
  d->add_option("--variance", data.variance, "variance of each channel component");
  d->add_flag("--zero-probe", data.zero_probe, "append a zero-channel sample");
  d->add_option("--out", data.out, "output file (.csv or .json); stdout if omitted");
  d->add_flag("--json", data.json, "write JSON instead of CSV");

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "squaring network error against sawtooth order");
  c->add_option("--max-order", curve.max_order, "largest sawtooth order");
  c->add_option("--csv", curve.csv, "append result rows to this CSV file");
  c->add_option("--svg", curve.svg, "write an error-vs-depth plot");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "summarize CSV result rows");
  r->add_option("files", report.files, "CSV files");
  r->add_option("--svg", report.svg, "write an error-vs-depth plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (b->parsed()) return cmd_build(build, out);
    if (v->parsed()) return cmd_verify(verify, out);
    if (d->parsed()) return cmd_data(data, out);
    if (c->parsed()) return cmd_curve(curve, out);
    if (r->parsed()) return cmd_report(report, out);
  } catch (const Exit& e) {
    err << "relunet: " << e.message << '\n';
    return e.code;
  } catch (const Error& e) {
    err << "relunet: " << e.what() << '\n';
    return e.code() == ErrorCode::kIo ? kExitIo : kExitUsage;
  }
  return kExitUsage;
}

}  // namespace relunet
