#include "mvfbm/fgn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "mvfbm/errors.hpp"
#include "mvfbm/fft.hpp"
#include "mvfbm/rng.hpp"

namespace mvfbm {

Hurst::Hurst(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("Hurst index must lie in (0, 1), got " + std::to_string(h));
}

FgnMethod parse_fgn_method(std::string_view name) {
  if (name == "cholesky") return FgnMethod::kCholesky;
  if (name == "davies-harte") return FgnMethod::kDaviesHarte;
  throw UsageError("unknown fGn method '" + std::string(name) + "' (expected cholesky or davies-harte)");
}

std::string_view to_string(FgnMethod method) noexcept {
  return method == FgnMethod::kCholesky ? "cholesky" : "davies-harte";
}

double fbm_covariance(double t, double s, Hurst hurst) {
  if (t < 0.0 || s < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
  const double two_h = 2.0 * hurst.value();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, double step, Hurst hurst) {
  if (!(step > 0.0)) throw DomainError("fgn_autocovariance: step must be positive");
  const double two_h = 2.0 * hurst.value();
  const double k = static_cast<double>(lag);
  const double scale = 0.5 * std::pow(step, two_h);
  if (lag == 0) return 2.0 * scale;
  return scale * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

std::vector<double> fgn_covariance_matrix(std::size_t n, double step, Hurst hurst) {
  std::vector<double> gamma(n);
  for (std::size_t k = 0; k < n; ++k) gamma[k] = fgn_autocovariance(k, step, hurst);
  std::vector<double> cov(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cov[i * n + j] = gamma[i > j ? i - j : j - i];
  return cov;
}

std::vector<double> fgn_cholesky_factor(std::size_t n, double step, Hurst hurst) {
  std::vector<double> a = fgn_covariance_matrix(n, step, hurst);
  // Cholesky-Banachiewicz, row by row; the upper triangle is zeroed.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (!(sum > 0.0)) throw CholeskyError(i, sum);
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  }
  return a;
}

CirculantSpectrum circulant_spectrum(std::size_t n, double step, Hurst hurst) {
  if (n == 0) throw UsageError("fGn block length must be at least 1");
  std::size_t m = 2 * fft::next_power_of_two(n);
  for (int attempt = 0; attempt <= kMaxEmbeddingRetries; ++attempt, m *= 2) {
    const std::size_t half = m / 2;
    std::vector<std::complex<double>> row(m);
    for (std::size_t j = 0; j <= half; ++j) row[j] = fgn_autocovariance(j, step, hurst);
    for (std::size_t j = 1; j < half; ++j) row[m - j] = row[j];
    fft::forward(row);

    CirculantSpectrum spec{n, m, std::vector<double>(m), attempt};
    double largest = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      spec.eigenvalues[k] = row[k].real();
      largest = std::max(largest, spec.eigenvalues[k]);
    }
    const double tol = kEigenvalueRelTol * largest;
    const bool ok = std::all_of(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                                [tol](double v) { return v >= -tol; });
    if (!ok) continue;
    for (double& v : spec.eigenvalues) v = std::max(v, 0.0);
    return spec;
  }
  throw EmbeddingError("circulant embedding has negative eigenvalues after " +
                       std::to_string(kMaxEmbeddingRetries) + " doublings (n=" + std::to_string(n) + ")");
}

void davies_harte_transform(const CirculantSpectrum& spectrum, std::span<const double> normals,
                            std::span<double> out) {
  const std::size_t m = spectrum.m;
  const std::size_t half = m / 2;
  if (normals.size() != m) throw UsageError("davies_harte_transform: expected m normals");
  if (out.size() != spectrum.n) throw UsageError("davies_harte_transform: output length mismatch");

  const double md = static_cast<double>(m);
  const auto& lam = spectrum.eigenvalues;
  std::vector<std::complex<double>> w(m);
  w[0] = std::sqrt(lam[0] / md) * normals[0];
  w[half] = std::sqrt(lam[half] / md) * normals[1];
  for (std::size_t k = 1; k < half; ++k) {
    const double s = std::sqrt(lam[k] / (2.0 * md));
    w[k] = {s * normals[2 * k], s * normals[2 * k + 1]};
    w[m - k] = std::conj(w[k]);
  }
  fft::forward(w);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = w[j].real();
}

FgnSampler::FgnSampler(std::size_t n, double step, Hurst hurst, FgnMethod method)
    : n_(n), step_(step), hurst_(hurst), method_(method) {
  if (n == 0) throw UsageError("fGn block length must be at least 1");
  if (!(step > 0.0)) throw DomainError("fGn step must be positive");
  if (method == FgnMethod::kCholesky) {
    if (n > kCholeskyMaxN)
      throw UsageError("Cholesky sampler is limited to n <= " + std::to_string(kCholeskyMaxN) +
                       "; use davies-harte");
    factor_ = fgn_cholesky_factor(n, step, hurst);
  } else {
    spectrum_ = circulant_spectrum(n, step, hurst);
  }
}

std::size_t FgnSampler::normals_per_block() const noexcept {
  return method_ == FgnMethod::kCholesky ? n_ : spectrum_.m;
}

void FgnSampler::sample_into(std::uint64_t seed, std::uint64_t stream_id, std::span<double> out) const {
  if (out.size() != n_) throw UsageError("FgnSampler: output length mismatch");
  std::vector<double> g(normals_per_block());
  rng::NormalStream(seed, stream_id, rng::Domain::kNoise).fill_normal(g);
  if (method_ == FgnMethod::kDaviesHarte) {
    davies_harte_transform(spectrum_, g, out);
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = factor_.data() + i * n_;
      double acc = 0.0;
      for (std::size_t k = 0; k <= i; ++k) acc += row[k] * g[k];
      out[i] = acc;
    }
  }
  for (double& v : out) v = std::nearbyint(v / kNoiseQuantum) * kNoiseQuantum;
}

NoiseBlock FgnSampler::sample(std::uint64_t seed, std::uint64_t stream_id) const {
  NoiseBlock block{std::vector<double>(n_), step_, hurst_, stream_id, seed};
  sample_into(seed, stream_id, block.increments);
  return block;
}

NoiseBlock generate_cholesky(std::size_t n, double step, Hurst hurst, std::uint64_t seed,
                             std::uint64_t stream_id) {
  return FgnSampler(n, step, hurst, FgnMethod::kCholesky).sample(seed, stream_id);
}

NoiseBlock generate_davies_harte(std::size_t n, double step, Hurst hurst, std::uint64_t seed,
                                 std::uint64_t stream_id) {
  return FgnSampler(n, step, hurst, FgnMethod::kDaviesHarte).sample(seed, stream_id);
}

std::vector<double> coarsen(std::span<const double> increments, std::size_t factor) {
  if (factor == 0 || increments.size() % factor != 0)
    throw UsageError("coarsen: factor " + std::to_string(factor) + " does not divide block length " +
                     std::to_string(increments.size()));
  std::vector<double> out(increments.size() / factor);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < factor; ++r) acc += increments[j * factor + r];
    out[j] = acc;
  }
  return out;
}

NoiseBlock coarsen(const NoiseBlock& block, std::size_t factor) {
  return NoiseBlock{coarsen(block.increments, factor), block.step * static_cast<double>(factor), block.hurst,
                    block.stream_id, block.seed};
}

std::vector<double> path_from_increments(std::span<const double> increments) {
  std::vector<double> path(increments.size() + 1, 0.0);
  for (std::size_t k = 0; k < increments.size(); ++k) path[k + 1] = path[k] + increments[k];
  return path;
}

}  // namespace mvfbm
