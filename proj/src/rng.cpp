#include "relunet/rng.hpp"

#include <cmath>
#include <numbers>

namespace relunet {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint64_t b) { return static_cast<double>(b >> 11) * 0x1p-53; }

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index, std::uint32_t coord,
                                               std::uint32_t stream) const noexcept {
  return philox4x32_10({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                        coord, stream},
                       {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::uint64_t CounterRng::bits(std::uint64_t index, std::uint32_t coord,
                               std::uint32_t stream) const noexcept {
  const auto b = block(index, coord, stream);
  return (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
}

double CounterRng::uniform(std::uint64_t index, std::uint32_t coord,
                           std::uint32_t stream) const noexcept {
  return to_unit(bits(index, coord, stream));
}

std::uint64_t CounterRng::below(std::uint64_t n, std::uint64_t index, std::uint32_t coord,
                                std::uint32_t stream) const noexcept {
  const unsigned __int128 p = static_cast<unsigned __int128>(bits(index, coord, stream)) * n;
  return static_cast<std::uint64_t>(p >> 64);
}

double CounterRng::gaussian(std::uint64_t index, std::uint32_t coord,
                            std::uint32_t stream) const noexcept {
  const auto b = block(index, coord, stream);
  const std::uint64_t lo = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
  const std::uint64_t hi = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
  // Shift by half an ulp so u1 lies in (0, 1) and the log is finite.
  const double u1 = (static_cast<double>(lo >> 11) + 0.5) * 0x1p-53;
  const double u2 = to_unit(hi);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace relunet
