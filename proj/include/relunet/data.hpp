#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "relunet/matrix.hpp"

namespace relunet {

struct DatasetMeta {
  std::string kind;  // "equispaced_real" or "qpsk_rayleigh"
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t count = 0;  // random samples, excluding any appended probe
  std::uint64_t seed = 0;
  double half_width = 0.0;
  std::size_t grid_points = 0;
  double clip = 0.0;
  double component_variance = 0.0;
  std::size_t clipped_entries = 0;
  bool zero_channel_probe = false;
  std::string packing = "column-major vec";
};

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<Vector> targets;
  DatasetMeta meta;

  std::size_t size() const noexcept { return inputs.size(); }
};

// [vec(W) column-major, x]; W(i, j) lands at index j * m + i.
Vector pack_matvec(const Matrix& W, std::span<const double> x);
struct MatvecParts {
  Matrix W;
  Vector x;
};
MatvecParts unpack_matvec(std::span<const double> packed, std::size_t m, std::size_t n);

// [vec(W1), vec(W2), x1, x2].
Vector pack_complex(const Matrix& W1, const Matrix& W2, std::span<const double> x1,
                    std::span<const double> x2);
struct ComplexParts {
  Matrix W1, W2;
  Vector x1, x2;
};
ComplexParts unpack_complex(std::span<const double> packed, std::size_t m, std::size_t n);

// Correctly rounded targets computed straight from a packed input.
Vector matvec_target(std::span<const double> packed, std::size_t m, std::size_t n);
Vector complex_target(std::span<const double> packed, std::size_t m, std::size_t n);

// Entries of W and x drawn uniformly from {-h + 2h j / (grid_points - 1)}.
Dataset equispaced_real_dataset(std::size_t m, std::size_t n, std::size_t count,
                                double half_width, std::size_t grid_points, std::uint64_t seed);

struct QpskOptions {
  double clip = 3.0;
  double component_variance = 0.5;
  // Appends one sample with an all-zero channel (target exactly 0).
  bool zero_channel_probe = false;
};

// Rayleigh channel entries (Gaussian real and imaginary parts, clipped to
// [-clip, clip]) and QPSK symbols with components in {-1/sqrt2, 1/sqrt2}.
Dataset qpsk_rayleigh_dataset(std::size_t m, std::size_t n, std::size_t count,
                              std::uint64_t seed, const QpskOptions& opts = {});

// One sample per line: inputs then targets, shortest round-trip decimals.
void write_csv(const Dataset& ds, std::ostream& out);
// Needs the input width to split each row; meta is left mostly empty.
Dataset read_csv(std::istream& in, std::size_t input_width);

std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);

}  // namespace relunet
