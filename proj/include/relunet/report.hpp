#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relunet/constructors.hpp"
#include "relunet/fnn.hpp"
#include "relunet/verification.hpp"

namespace relunet {

// One verification result. Doubles are written with shortest round-trip
// decimals, so equal rows mean bit-equal results.
struct CsvRow {
  std::string kind;
  std::size_t m = 0;
  std::size_t n = 0;
  double D = 0.0;
  double eps = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double sup_error = 0.0;
  double mse = 0.0;
  std::optional<double> grad_sup_error;
  NetworkMetrics metrics;
  bool width_ok = false;
  bool weight_ok = false;
  bool depth_ok = false;
  bool budget_ok = false;
  int sawtooth_order = 0;

  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

CsvRow make_row(const ConstructionRecord& rec, const ErrorReport& rep,
                const BudgetCompliance& budget);

std::string csv_header();
std::string to_csv(const CsvRow& row);
CsvRow parse_csv_row(std::string_view line);
// Skips header lines; throws parse errors with the line number.
std::vector<CsvRow> read_csv_rows(std::istream& in);

// Fixed-width table. Consecutive rows of the same kind also show the error
// ratio to the previous row.
std::string summary_table(const std::vector<CsvRow>& rows);

// Static plot of log2(sup_error) against depth, one polyline per kind.
std::string error_curve_svg(const std::vector<CsvRow>& rows);

}  // namespace relunet
