#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mvfbm::rng {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32-10 block function (Salmon et al., Random123).
Philox4x32Counter philox4x32(Philox4x32Counter counter, Philox4x32Key key) noexcept;

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for replication / sub-experiment `index` under `tag`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept;

/// Independent draw families keyed off the same seed.
enum class Domain : std::uint32_t {
  kNoise = 0,
  kInitialPath = 1,
  kTest = 7,
};

/// Counter-based Gaussian stream. The value at `position` depends only on
/// (seed, domain, stream_id, position), so streams can be generated in any
/// order and on any thread.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id, Domain domain = Domain::kNoise) noexcept;

  /// Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t position) const noexcept;

  /// Standard normal via the inverse normal CDF of `uniform(position)`.
  double normal(std::uint64_t position) const noexcept;

  /// Fill `out` with normals at positions [first, first + out.size()).
  void fill_normal(std::span<double> out, std::uint64_t first = 0) const;

 private:
  std::uint64_t raw64(std::uint64_t position) const noexcept;

  Philox4x32Key key_;
  std::uint64_t stream_;
};

/// Standard normal quantile function.
double normal_quantile(double u);

}  // namespace mvfbm::rng
