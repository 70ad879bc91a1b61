#include "relunet/data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "relunet/error.hpp"
#include "relunet/exact_sum.hpp"
#include "relunet/rng.hpp"
#include "relunet/serialization.hpp"

namespace relunet {

namespace {

// Streams of the counter-based generator.
constexpr std::uint32_t kGridStream = 0;
constexpr std::uint32_t kChannelStream = 1;
constexpr std::uint32_t kSymbolStream = 2;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

void require_packed(std::span<const double> packed, std::size_t expected) {
  if (packed.size() != expected) {
    throw Error(ErrorCode::kPackingMismatch,
                "packed input has " + std::to_string(packed.size()) + " entries, expected " +
                    std::to_string(expected));
  }
}

void write_row(std::ostream& out, const Vector& v, bool& first) {
  for (double x : v) {
    if (!first) out << ',';
    out << format_double(x);
    first = false;
  }
}

nlohmann::json meta_to_json(const DatasetMeta& m) {
  return {{"kind", m.kind},
          {"m", m.m},
          {"n", m.n},
          {"count", m.count},
          {"seed", m.seed},
          {"half_width", m.half_width},
          {"grid_points", m.grid_points},
          {"clip", m.clip},
          {"component_variance", m.component_variance},
          {"clipped_entries", m.clipped_entries},
          {"zero_channel_probe", m.zero_channel_probe},
          {"packing", m.packing}};
}

DatasetMeta meta_from_json(const nlohmann::json& j) {
  DatasetMeta m;
  m.kind = j.value("kind", "");
  m.m = j.value("m", std::size_t{0});
  m.n = j.value("n", std::size_t{0});
  m.count = j.value("count", std::size_t{0});
  m.seed = j.value("seed", std::uint64_t{0});
  m.half_width = j.value("half_width", 0.0);
  m.grid_points = j.value("grid_points", std::size_t{0});
  m.clip = j.value("clip", 0.0);
  m.component_variance = j.value("component_variance", 0.0);
  m.clipped_entries = j.value("clipped_entries", std::size_t{0});
  m.zero_channel_probe = j.value("zero_channel_probe", false);
  m.packing = j.value("packing", "column-major vec");
  return m;
}

}  // namespace

Vector pack_matvec(const Matrix& W, std::span<const double> x) {
  if (W.cols() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "pack_matvec: W has " +
                                                   std::to_string(W.cols()) + " columns, x has " +
                                                   std::to_string(x.size()) + " entries");
  }
  Vector out;
  out.reserve(W.rows() * W.cols() + x.size());
  for (std::size_t j = 0; j < W.cols(); ++j)
    for (std::size_t i = 0; i < W.rows(); ++i) out.push_back(W(i, j));
  out.insert(out.end(), x.begin(), x.end());
  return out;
}

MatvecParts unpack_matvec(std::span<const double> packed, std::size_t m, std::size_t n) {
  require_packed(packed, m * n + n);
  MatvecParts p{Matrix(m, n), Vector(packed.begin() + m * n, packed.end())};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) p.W(i, j) = packed[j * m + i];
  return p;
}

Vector pack_complex(const Matrix& W1, const Matrix& W2, std::span<const double> x1,
                    std::span<const double> x2) {
  if (W1.rows() != W2.rows() || W1.cols() != W2.cols() || x1.size() != x2.size() ||
      W1.cols() != x1.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "pack_complex: inconsistent shapes");
  }
  const Vector a = pack_matvec(W1, x1);
  const Vector b = pack_matvec(W2, x2);
  const std::size_t mn = W1.rows() * W1.cols();
  Vector out;
  out.reserve(2 * mn + 2 * x1.size());
  out.insert(out.end(), a.begin(), a.begin() + mn);
  out.insert(out.end(), b.begin(), b.begin() + mn);
  out.insert(out.end(), x1.begin(), x1.end());
  out.insert(out.end(), x2.begin(), x2.end());
  return out;
}

ComplexParts unpack_complex(std::span<const double> packed, std::size_t m, std::size_t n) {
  require_packed(packed, 2 * m * n + 2 * n);
  const std::size_t mn = m * n;
  ComplexParts p{Matrix(m, n), Matrix(m, n),
                 Vector(packed.begin() + 2 * mn, packed.begin() + 2 * mn + n),
                 Vector(packed.begin() + 2 * mn + n, packed.end())};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      p.W1(i, j) = packed[j * m + i];
      p.W2(i, j) = packed[mn + j * m + i];
    }
  }
  return p;
}

Vector matvec_target(std::span<const double> packed, std::size_t m, std::size_t n) {
  require_packed(packed, m * n + n);
  Vector y(m);
  ExactSum acc;
  for (std::size_t i = 0; i < m; ++i) {
    acc.clear();
    for (std::size_t j = 0; j < n; ++j) acc.add(packed[j * m + i] * packed[m * n + j]);
    y[i] = acc.value();
  }
  return y;
}

Vector complex_target(std::span<const double> packed, std::size_t m, std::size_t n) {
  require_packed(packed, 2 * m * n + 2 * n);
  const std::size_t mn = m * n;
  const double* w1 = packed.data();
  const double* w2 = w1 + mn;
  const double* x1 = w1 + 2 * mn;
  const double* x2 = x1 + n;
  Vector y(2 * m);
  ExactSum re, im;
  for (std::size_t i = 0; i < m; ++i) {
    re.clear();
    im.clear();
    for (std::size_t j = 0; j < n; ++j) {
      const double a = w1[j * m + i];
      const double b = w2[j * m + i];
      re.add(a * x1[j]);
      re.add(-(b * x2[j]));
      im.add(a * x2[j]);
      im.add(b * x1[j]);
    }
    y[i] = re.value();
    y[m + i] = im.value();
  }
  return y;
}

Dataset equispaced_real_dataset(std::size_t m, std::size_t n, std::size_t count,
                                double half_width, std::size_t grid_points, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "m and n must be at least 1");
  require(count >= 1, "count must be at least 1");
  require(grid_points >= 2, "grid_points must be at least 2");
  require(std::isfinite(half_width) && half_width > 0.0, "half_width must be positive");

  const CounterRng rng(seed);
  const double h = half_width;
  const double steps = static_cast<double>(grid_points - 1);
  const std::size_t width = m * n + n;

  Dataset ds;
  ds.inputs.reserve(count);
  ds.targets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector a(width);
    for (std::size_t c = 0; c < width; ++c) {
      const auto j = static_cast<double>(
          rng.below(grid_points, i, static_cast<std::uint32_t>(c), kGridStream));
      a[c] = -h + 2.0 * h * j / steps;
    }
    ds.targets.push_back(matvec_target(a, m, n));
    ds.inputs.push_back(std::move(a));
  }
  ds.meta.kind = "equispaced_real";
  ds.meta.m = m;
  ds.meta.n = n;
  ds.meta.count = count;
  ds.meta.seed = seed;
  ds.meta.half_width = h;
  ds.meta.grid_points = grid_points;
  return ds;
}

Dataset qpsk_rayleigh_dataset(std::size_t m, std::size_t n, std::size_t count,
                              std::uint64_t seed, const QpskOptions& opts) {
  require(m >= 1 && n >= 1, "m and n must be at least 1");
  require(count >= 1, "count must be at least 1");
  require(std::isfinite(opts.clip) && opts.clip > 0.0, "clip must be positive");
  require(std::isfinite(opts.component_variance) && opts.component_variance > 0.0,
          "component variance must be positive");

  const CounterRng rng(seed);
  const double sigma = std::sqrt(opts.component_variance);
  const double s = std::numbers::sqrt2 / 2.0;
  const std::size_t mn = m * n;
  const std::size_t total = count + (opts.zero_channel_probe ? 1 : 0);

  Dataset ds;
  ds.inputs.reserve(total);
  ds.targets.reserve(total);
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const bool probe = i == count;
    Vector c(2 * mn + 2 * n, 0.0);
    if (!probe) {
      for (std::size_t k = 0; k < 2 * mn; ++k) {
        const double g = sigma * rng.gaussian(i, static_cast<std::uint32_t>(k), kChannelStream);
        const double v = std::clamp(g, -opts.clip, opts.clip);
        if (v != g) ++clipped;
        c[k] = v;
      }
    }
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const bool neg = rng.bits(i, static_cast<std::uint32_t>(k), kSymbolStream) & 1u;
      c[2 * mn + k] = neg ? -s : s;
    }
    ds.targets.push_back(complex_target(c, m, n));
    ds.inputs.push_back(std::move(c));
  }
  ds.meta.kind = "qpsk_rayleigh";
  ds.meta.m = m;
  ds.meta.n = n;
  ds.meta.count = count;
  ds.meta.seed = seed;
  ds.meta.clip = opts.clip;
  ds.meta.component_variance = opts.component_variance;
  ds.meta.clipped_entries = clipped;
  ds.meta.zero_channel_probe = opts.zero_channel_probe;
  return ds;
}

void write_csv(const Dataset& ds, std::ostream& out) {
  if (ds.inputs.empty()) return;
  const std::size_t ni = ds.inputs.front().size();
  const std::size_t nt = ds.targets.front().size();
  for (std::size_t k = 0; k < ni; ++k) out << (k ? ",a" : "a") << k;
  for (std::size_t k = 0; k < nt; ++k) out << ",b" << k;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bool first = true;
    write_row(out, ds.inputs[i], first);
    write_row(out, ds.targets[i], first);
    out << '\n';
  }
}

Dataset read_csv(std::istream& in, std::size_t input_width) {
  Dataset ds;
  std::string line;
  std::size_t row_width = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line[0] == 'a') continue;  // header
    Vector row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      try {
        row.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, "csv line " + std::to_string(line_no) + ": " + e.what());
      }
      start = comma + 1;
    }
    if (row_width == 0) row_width = row.size();
    if (row.size() != row_width || row.size() <= input_width) {
      throw Error(ErrorCode::kParse, "csv line " + std::to_string(line_no) +
                                         " has " + std::to_string(row.size()) + " fields");
    }
    ds.inputs.emplace_back(row.begin(), row.begin() + input_width);
    ds.targets.emplace_back(row.begin() + input_width, row.end());
  }
  ds.meta.count = ds.size();
  return ds;
}

std::string dataset_to_json(const Dataset& ds) {
  std::ostringstream out;
  out << "{\"meta\":" << meta_to_json(ds.meta).dump();
  const auto rows = [&](const char* key, const std::vector<Vector>& vs) {
    out << ",\"" << key << "\":[";
    for (std::size_t i = 0; i < vs.size(); ++i) {
      out << (i ? ",[" : "[");
      bool first = true;
      write_row(out, vs[i], first);
      out << ']';
    }
    out << ']';
  };
  rows("inputs", ds.inputs);
  rows("targets", ds.targets);
  out << "}\n";
  return out.str();
}

Dataset dataset_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    Dataset ds;
    ds.meta = meta_from_json(j.at("meta"));
    ds.inputs = j.at("inputs").get<std::vector<Vector>>();
    ds.targets = j.at("targets").get<std::vector<Vector>>();
    if (ds.inputs.size() != ds.targets.size()) {
      throw Error(ErrorCode::kParse, "dataset has unequal input and target counts");
    }
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("dataset json: ") + e.what());
  }
}

}  // namespace relunet
