#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace tiprel {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: the output is a pure function of
/// (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Independent draw families. Each family owns a disjoint slice of the
/// counter space, so e.g. MALA accept/reject uniforms never reuse a Langevin
/// noise value.
enum class Stream : std::uint32_t {
  langevin_noise = 0,
  initialization = 1,
  mala_proposal = 2,
  mala_accept = 3,
  ancestral = 4,
  dataset = 5,
  reference = 6,
};

/// Counter-based random source. Every value depends only on
/// (seed, stream, chain, step, index), never on call order or thread.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Standard normal for one (chain, step, index) tuple.
  double normal(Stream s, std::uint64_t chain, std::uint64_t step, std::uint64_t index) const;
  /// Fills out[i] = normal(s, chain, step, i) for i < out.size(), computing
  /// each Box-Muller pair once.
  void normals(Stream s, std::uint64_t chain, std::uint64_t step, std::span<double> out) const;
  /// Uniform on the open interval (0, 1).
  double uniform(Stream s, std::uint64_t chain, std::uint64_t step, std::uint64_t index) const;

 private:
  std::array<std::uint32_t, 4> block(Stream s, std::uint64_t chain, std::uint64_t step,
                                     std::uint64_t pair) const;
  std::uint64_t seed_;
};

/// Z_k entry for Langevin noise: normal(Stream::langevin_noise, ...).
double normal_stream(std::uint64_t seed, std::uint64_t chain, std::uint64_t step,
                     std::uint64_t dim_index);

}  // namespace tiprel
