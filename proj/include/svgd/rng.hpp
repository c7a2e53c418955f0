#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace svgd {

/// Reproducible random stream: xoshiro256** seeded from (seed, stream id)
/// through splitmix64. All variate transforms are implemented here rather
/// than taken from <random>, whose distributions are implementation-defined,
/// so identical (seed, stream) pairs give identical draws on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Raw 64-bit output.
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform integer on [0, bound); unbiased (rejection). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  /// Gamma(shape, rate), Marsaglia–Tsang. shape > 0, rate > 0.
  double gamma(double shape, double rate);

  /// A derived, independent stream (same seed, different stream id space).
  RngStream split(std::uint64_t child) const;

  template <typename T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace svgd
