#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace oracle {

/// Cov(B_t, B_s) for fBm, written out from the definition.
inline double fbm_cov(double t, double s, double h) {
  return 0.5 * (std::pow(t, 2 * h) + std::pow(s, 2 * h) - std::pow(std::abs(t - s), 2 * h));
}

/// Increment covariance from the fBm covariance by bilinearity, evaluated on the
/// integer grid (exact time differences) and rescaled by self-similarity.
inline double increment_cov(std::size_t j, std::size_t k, double dt, double h) {
  const double tj = static_cast<double>(j), tk = static_cast<double>(k);
  const double unit = fbm_cov(tj + 1, tk + 1, h) - fbm_cov(tj + 1, tk, h) - fbm_cov(tj, tk + 1, h) + fbm_cov(tj, tk, h);
  return std::pow(dt, 2 * h) * unit;
}

/// O(n^2) DFT.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * M_PI * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

/// W_p between equal-size clouds by enumerating every permutation.
inline double wasserstein_bruteforce(const std::vector<double>& a, const std::vector<double>& b, std::size_t d,
                                     double p) {
  const std::size_t n = a.size() / d;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = a[i * d + c] - b[perm[i] * d + c];
        sq += diff * diff;
      }
      total += std::pow(std::sqrt(sq), p);
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(n), 1.0 / p);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace oracle
