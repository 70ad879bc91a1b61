#include "relunet/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

#include "relunet/error.hpp"
#include "relunet/serialization.hpp"

namespace relunet {

namespace {

constexpr std::size_t kColumns = 20;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <class T>
T parse_uint(std::string_view s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "not an integer: '" + std::string(s) + "'");
  }
  return v;
}

bool parse_flag(std::string_view s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw Error(ErrorCode::kParse, "not a 0/1 flag: '" + std::string(s) + "'");
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

CsvRow make_row(const ConstructionRecord& rec, const ErrorReport& rep,
                const BudgetCompliance& budget) {
  CsvRow r;
  r.kind = std::string(to_string(rec.kind));
  r.m = rec.m;
  r.n = rec.n;
  r.D = rec.D;
  r.eps = rec.eps;
  r.samples = rep.sample_count;
  r.seed = rep.seed;
  r.sup_error = rep.sup_error;
  r.mse = rep.mse;
  r.grad_sup_error = rep.grad_sup_error;
  r.metrics = budget.actual;
  r.width_ok = budget.width_ok;
  r.weight_ok = budget.weight_ok;
  r.depth_ok = budget.depth_ok;
  r.budget_ok = budget.ok();
  r.sawtooth_order = rec.sawtooth_order;
  return r;
}

std::string csv_header() {
  return "kind,m,n,D,eps,samples,seed,sup_error,mse,grad_sup_error,L,M,N,W,B,"
         "width_ok,weight_ok,depth_ok,budget_ok,sawtooth_order";
}

std::string to_csv(const CsvRow& r) {
  std::ostringstream out;
  out << r.kind << ',' << r.m << ',' << r.n << ',' << format_double(r.D) << ','
      << format_double(r.eps) << ',' << r.samples << ',' << r.seed << ','
      << format_double(r.sup_error) << ',' << format_double(r.mse) << ','
      << (r.grad_sup_error ? format_double(*r.grad_sup_error) : "") << ',' << r.metrics.depth
      << ',' << r.metrics.connectivity << ',' << r.metrics.neurons << ',' << r.metrics.max_width
      << ',' << format_double(r.metrics.max_weight) << ',' << r.width_ok << ',' << r.weight_ok
      << ',' << r.depth_ok << ',' << r.budget_ok << ',' << r.sawtooth_order;
  return out.str();
}

CsvRow parse_csv_row(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = split(line);
  if (f.size() != kColumns) {
    throw Error(ErrorCode::kParse, "expected " + std::to_string(kColumns) + " fields, got " +
                                       std::to_string(f.size()));
  }
  CsvRow r;
  r.kind = std::string(f[0]);
  r.m = parse_uint<std::size_t>(f[1]);
  r.n = parse_uint<std::size_t>(f[2]);
  r.D = parse_double(f[3]);
  r.eps = parse_double(f[4]);
  r.samples = parse_uint<std::size_t>(f[5]);
  r.seed = parse_uint<std::uint64_t>(f[6]);
  r.sup_error = parse_double(f[7]);
  r.mse = parse_double(f[8]);
  if (!f[9].empty()) r.grad_sup_error = parse_double(f[9]);
  r.metrics.depth = parse_uint<std::size_t>(f[10]);
  r.metrics.connectivity = parse_uint<std::size_t>(f[11]);
  r.metrics.neurons = parse_uint<std::size_t>(f[12]);
  r.metrics.max_width = parse_uint<std::size_t>(f[13]);
  r.metrics.max_weight = parse_double(f[14]);
  r.width_ok = parse_flag(f[15]);
  r.weight_ok = parse_flag(f[16]);
  r.depth_ok = parse_flag(f[17]);
  r.budget_ok = parse_flag(f[18]);
  r.sawtooth_order = parse_uint<int>(f[19]);
  return r;
}

std::vector<CsvRow> read_csv_rows(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.starts_with("kind,")) continue;
    try {
      rows.push_back(parse_csv_row(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::string summary_table(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-15s %3s %3s %5s %10s %8s %11s %11s %11s %8s %4s %8s %6s %6s %6s\n",
                "kind", "m", "n", "D", "eps", "samples", "sup_error", "mse", "grad_err",
                "ratio", "L", "M", "W", "B", "budget");
  out << buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    std::string ratio = "-";
    if (i > 0 && rows[i - 1].kind == r.kind && r.sup_error > 0.0) {
      ratio = short_num(rows[i - 1].sup_error / r.sup_error);
    }
    std::snprintf(buf, sizeof buf,
                  "%-15s %3zu %3zu %5s %10s %8zu %11.4e %11.4e %11s %8s %4zu %8zu %6zu %6s %6s\n",
                  r.kind.c_str(), r.m, r.n, short_num(r.D).c_str(), short_num(r.eps).c_str(),
                  r.samples, r.sup_error, r.mse,
                  r.grad_sup_error ? short_num(*r.grad_sup_error).c_str() : "-", ratio.c_str(),
                  r.metrics.depth, r.metrics.connectivity, r.metrics.max_width,
                  short_num(r.metrics.max_weight).c_str(), r.budget_ok ? "ok" : "FAIL");
    out << buf;
  }
  return out.str();
}

std::string error_curve_svg(const std::vector<CsvRow>& rows) {
  constexpr double kW = 640, kH = 400, kPad = 50;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const CsvRow& r : rows) {
    if (!(r.sup_error > 0.0)) continue;
    const double x = static_cast<double>(r.metrics.depth);
    const double y = std::log2(r.sup_error);
    series[r.kind].emplace_back(x, y);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
      << "\" y2=\"" << kH - kPad << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
      << kH - kPad << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\">depth L</text>\n";
  out << "<text x=\"15\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 15 " << kH / 2
      << ")\" text-anchor=\"middle\">log2 sup error</text>\n";
  if (series.empty()) {
    out << "</svg>\n";
    return out.str();
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const auto px = [&](double x) { return kPad + (x - x_min) / (x_max - x_min) * (kW - 2 * kPad); };
  const auto py = [&](double y) {
    return kH - kPad - (y - y_min) / (y_max - y_min) * (kH - 2 * kPad);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::size_t idx = 0;
  for (auto& [kind, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = colors[idx % 5];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& [x, y] : pts) out << px(x) << ',' << py(y) << ' ';
    out << "\"/>\n";
    for (const auto& [x, y] : pts) {
      out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    out << "<text x=\"" << kW - kPad - 120 << "\" y=\"" << kPad + 16 * idx << "\" fill=\""
        << color << "\">" << kind << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace relunet
