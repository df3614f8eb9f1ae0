#include "tiprel/rng.hpp"

#include <cmath>
#include <numbers>

namespace tiprel {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in (0, 1]: never zero, so log() is safe.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

// 53-bit uniform in [0, 1).
inline double half_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> CounterRng::block(Stream s, std::uint64_t chain, std::uint64_t step,
                                               std::uint64_t pair) const {
  // Counter words: chain, step, pair index, stream tag with the high bits of
  // step folded into the upper half.
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(chain), static_cast<std::uint32_t>(step),
      static_cast<std::uint32_t>(pair),
      (static_cast<std::uint32_t>(s) & 0xFFu) |
          (static_cast<std::uint32_t>(step >> 32) << 8)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_) ^ static_cast<std::uint32_t>(chain >> 32),
      static_cast<std::uint32_t>(seed_ >> 32) ^ static_cast<std::uint32_t>(pair >> 32)};
  return philox4x32(ctr, key);
}

namespace {

// Both outputs of one Box-Muller transform. Shared by the scalar and batched
// paths so that they agree bitwise (the compiler may fuse cos/sin into sincos).
[[gnu::noinline]] std::array<double, 2> box_muller(const std::array<std::uint32_t, 4>& w) {
  const double radius = std::sqrt(-2.0 * std::log(open_unit(w[0], w[1])));
  const double angle = 2.0 * std::numbers::pi * half_open_unit(w[2], w[3]);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

double CounterRng::normal(Stream s, std::uint64_t chain, std::uint64_t step,
                          std::uint64_t index) const {
  return box_muller(block(s, chain, step, index / 2))[index % 2];
}

void CounterRng::normals(Stream s, std::uint64_t chain, std::uint64_t step,
                         std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto pair = box_muller(block(s, chain, step, i / 2));
    out[i] = pair[0];
    if (i + 1 < out.size()) out[i + 1] = pair[1];
  }
}

double CounterRng::uniform(Stream s, std::uint64_t chain, std::uint64_t step,
                           std::uint64_t index) const {
  const auto w = block(s, chain, step, index / 2);
  const double u = (index % 2 == 0) ? half_open_unit(w[0], w[1]) : half_open_unit(w[2], w[3]);
  // Shift [0,1) to (0,1) by half an ulp step.
  return u + 0x1.0p-54;
}

double normal_stream(std::uint64_t seed, std::uint64_t chain, std::uint64_t step,
                     std::uint64_t dim_index) {
  return CounterRng(seed).normal(Stream::langevin_noise, chain, step, dim_index);
}

}  // namespace tiprel
