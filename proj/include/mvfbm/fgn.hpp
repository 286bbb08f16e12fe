#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mvfbm {

/// Hurst index of a fractional Brownian motion, 0 < h < 1.
class Hurst {
 public:
  explicit Hurst(double h);

  double value() const noexcept { return h_; }
  /// h < 1/2: the regime where the diffusion must be measure independent.
  bool rough() const noexcept { return h_ < 0.5; }
  bool brownian() const noexcept { return h_ == 0.5; }

  friend bool operator==(Hurst, Hurst) = default;

 private:
  double h_;
};

enum class FgnMethod { kCholesky, kDaviesHarte };

FgnMethod parse_fgn_method(std::string_view name);
std::string_view to_string(FgnMethod method) noexcept;

/// Increments of one fBm path on a uniform grid: increments[k] = B((k+1)dt) - B(k dt).
struct NoiseBlock {
  std::vector<double> increments;
  double step = 0.0;
  Hurst hurst{0.5};
  std::uint64_t stream_id = 0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return increments.size(); }
};

/// Cov(B_t, B_s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double t, double s, Hurst hurst);

/// Autocovariance of fractional Gaussian noise with step `step` at `lag`.
double fgn_autocovariance(std::size_t lag, double step, Hurst hurst);

/// Dense n x n Toeplitz covariance of n consecutive increments, row-major.
std::vector<double> fgn_covariance_matrix(std::size_t n, double step, Hurst hurst);

/// Lower Cholesky factor of `fgn_covariance_matrix`, row-major.
/// Throws CholeskyError naming the first non-positive pivot.
std::vector<double> fgn_cholesky_factor(std::size_t n, double step, Hurst hurst);

/// Eigenvalues of the circulant embedding of the fGn covariance.
struct CirculantSpectrum {
  std::size_t n = 0;             ///< requested length
  std::size_t m = 0;             ///< embedding size, 2 * next_power_of_two(n) * 2^retries
  std::vector<double> eigenvalues;  ///< length m, clamped to be >= 0
  int retries = 0;
};

inline constexpr int kMaxEmbeddingRetries = 3;
inline constexpr double kEigenvalueRelTol = 1e-8;

CirculantSpectrum circulant_spectrum(std::size_t n, double step, Hurst hurst);

/// Maps m standard normals to n fGn increments through the embedding.
/// The map is linear, so feeding unit vectors recovers its columns.
void davies_harte_transform(const CirculantSpectrum& spectrum, std::span<const double> normals,
                            std::span<double> out);

/// Sampled increments are rounded to integer multiples of this quantum. Every
/// partial sum of quantized increments is then exact in double precision (for
/// |sum| < 2^12), so a path and its coarsened copy agree bit-for-bit at shared
/// grid points. The perturbation is far below the noise scale for any grid in use.
inline constexpr double kNoiseQuantum = 0x1.0p-40;

/// Largest n accepted by the Cholesky sampler.
inline constexpr std::size_t kCholeskyMaxN = 4096;

/// Reusable sampler: the factorization is computed once and each
/// (seed, stream_id) pair is mapped to a block through the same Gaussian stream.
class FgnSampler {
 public:
  FgnSampler(std::size_t n, double step, Hurst hurst, FgnMethod method);

  NoiseBlock sample(std::uint64_t seed, std::uint64_t stream_id) const;
  void sample_into(std::uint64_t seed, std::uint64_t stream_id, std::span<double> out) const;

  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return step_; }
  Hurst hurst() const noexcept { return hurst_; }
  FgnMethod method() const noexcept { return method_; }
  /// Number of standard normals drawn per block.
  std::size_t normals_per_block() const noexcept;
  const CirculantSpectrum& spectrum() const noexcept { return spectrum_; }

 private:
  std::size_t n_;
  double step_;
  Hurst hurst_;
  FgnMethod method_;
  std::vector<double> factor_;  // Cholesky only
  CirculantSpectrum spectrum_;  // Davies-Harte only
};

NoiseBlock generate_cholesky(std::size_t n, double step, Hurst hurst, std::uint64_t seed,
                             std::uint64_t stream_id);
NoiseBlock generate_davies_harte(std::size_t n, double step, Hurst hurst, std::uint64_t seed,
                                 std::uint64_t stream_id);

/// Sums consecutive groups of `factor` increments: the same path seen on a
/// grid `factor` times coarser.
NoiseBlock coarsen(const NoiseBlock& block, std::size_t factor);
std::vector<double> coarsen(std::span<const double> increments, std::size_t factor);

/// Cumulative sums with B(0) = 0 prepended; length n + 1.
std::vector<double> path_from_increments(std::span<const double> increments);
inline std::vector<double> path_from_increments(const NoiseBlock& block) {
  return path_from_increments(block.increments);
}

}  // namespace mvfbm
