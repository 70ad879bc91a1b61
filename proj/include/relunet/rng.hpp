#pragma once

#include <array>
#include <cstdint>

namespace relunet {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

// Stateless generator: every draw is a pure function of
// (seed, index, coordinate, stream), so any prefix of a sample sequence and
// any partition of it across threads yields the same values.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t coord,
                                     std::uint32_t stream) const noexcept;
  std::uint64_t bits(std::uint64_t index, std::uint32_t coord,
                     std::uint32_t stream) const noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t index, std::uint32_t coord, std::uint32_t stream) const noexcept;
  // Uniform on {0, ..., n-1}; multiply-shift, bias below 2^-64 * n.
  std::uint64_t below(std::uint64_t n, std::uint64_t index, std::uint32_t coord,
                      std::uint32_t stream) const noexcept;
  // Standard normal via Box-Muller on the two halves of one block.
  double gaussian(std::uint64_t index, std::uint32_t coord, std::uint32_t stream) const noexcept;

 private:
  std::uint64_t seed_;
};

}  // namespace relunet
