#include "mvfbm/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

namespace mvfbm::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ mix64(tag)) + index);
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream_id, Domain domain) noexcept
    : stream_(stream_id) {
  const std::uint64_t k = mix64(seed ^ (static_cast<std::uint64_t>(domain) << 56));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::uint64_t NormalStream::raw64(std::uint64_t position) const noexcept {
  // One Philox block yields two 64-bit words.
  const std::uint64_t block = position >> 1;
  const Philox4x32Counter out = philox4x32(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
      key_);
  const std::size_t half = (position & 1u) * 2;
  return (static_cast<std::uint64_t>(out[half + 1]) << 32) | out[half];
}

double NormalStream::uniform(std::uint64_t position) const noexcept {
  return (static_cast<double>(raw64(position) >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::normal(std::uint64_t position) const noexcept {
  return normal_quantile(uniform(position));
}

void NormalStream::fill_normal(std::span<double> out, std::uint64_t first) const {
  std::size_t j = 0;
  if (out.size() > 0 && (first & 1u)) {
    out[0] = normal(first);
    j = 1;
  }
  // Aligned pairs share one Philox block.
  for (; j + 1 < out.size(); j += 2) {
    const std::uint64_t block = (first + j) >> 1;
    const Philox4x32Counter w = philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
    const std::uint64_t a = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
    const std::uint64_t b = (static_cast<std::uint64_t>(w[3]) << 32) | w[2];
    out[j] = normal_quantile((static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53);
    out[j + 1] = normal_quantile((static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53);
  }
  if (j < out.size()) out[j] = normal(first + j);
}

double normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace mvfbm::rng
