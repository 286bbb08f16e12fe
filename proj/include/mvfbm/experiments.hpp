#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvfbm/fgn.hpp"
#include "mvfbm/model.hpp"
#include "mvfbm/solver.hpp"

namespace mvfbm {

/// ((1/N) sum_i |fine_i(T) - coarse_i(T)|^p)^{1/p}. The two runs must share
/// seed, particle count, model and horizon.
double strong_error(const EnsembleTrajectory& fine, const EnsembleTrajectory& coarse, double p = 2.0);

/// Like `strong_error`, with |.| replaced by the maximum over the coarse grid
/// points in [0, T]. Only meaningful for H > 1/2.
double strong_error_sup(const EnsembleTrajectory& fine, const EnsembleTrajectory& coarse, double p = 2.0);

/// Ordinary least squares of log2(y) on log2(x).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  ///< NaN with fewer than three points
  double ci_low = 0.0;        ///< 95% Student-t interval; NaN with fewer than three points
  double ci_high = 0.0;
  std::size_t points = 0;
};

SlopeFit fit_log_log(std::span<const double> x, std::span<const double> y);

enum class ErrorNorm { kTerminal, kSupremum };

struct ConvergenceStudy {
  ModelSpec model;
  std::vector<double> hursts{0.6, 0.9};
  double horizon = 1.0;
  int fine_level = 14;                      ///< reference step 2^-fine_level
  std::vector<int> coarse_levels{7, 8, 9, 10};
  std::size_t particles = 200;
  std::size_t repeats = 8;
  std::uint64_t seed = 0;
  double p = 2.0;
  ErrorNorm norm = ErrorNorm::kTerminal;
  FgnMethod method = FgnMethod::kDaviesHarte;
  int threads = 1;
};

struct ErrorRow {
  double step = 0.0;
  double err = 0.0;         ///< mean of the per-replication errors
  std::size_t repeats = 0;
  double std_error = 0.0;
  bool degenerate = false;  ///< err == 0; excluded from the fit
};

struct ErrorTable {
  double hurst = 0.0;
  std::vector<ErrorRow> rows;  ///< sorted by step, descending
  SlopeFit fit;
  bool fit_valid = false;
  double theoretical_exponent = 0.0;  ///< min(holder exponent, H)
  bool strictly_decreasing = false;   ///< errors fall with every refinement
  std::vector<std::string> warnings;
};

/// Coupled fine/coarse runs per replication; one table per Hurst index.
std::vector<ErrorTable> convergence_study(const ConvergenceStudy& study);

struct ChaosStudy {
  ModelSpec model;
  TimeGrid grid{0.125, 16, 1.0};
  std::vector<std::size_t> particle_counts{32, 64, 128, 256};
  std::size_t reference_particles = 512;
  double hurst = 0.7;
  std::uint64_t seed = 0;
  double p = 2.0;
  std::size_t repeats = 16;
  FgnMethod method = FgnMethod::kDaviesHarte;
  int threads = 1;
};

struct ChaosRow {
  std::size_t particles = 0;
  double gap = 0.0;
  double std_error = 0.0;
  std::size_t repeats = 0;
};

struct ChaosTable {
  std::vector<ChaosRow> rows;
  SlopeFit fit;  ///< log2 gap against log2 N
  bool fit_valid = false;
  /// Every gap is at most `slack` times its predecessor.
  bool non_increasing = false;
  double slack = 1.1;
  /// ((p - eps) / p)^floor(T / delay) with eps = 1; the rate is only a bound.
  double lambda = 0.0;
};

/// Gap between the N-particle system and a larger shared-noise reference system,
/// which stands in for the non-interacting limit.
ChaosTable chaos_study(const ChaosStudy& study);

struct MaximalRow {
  double horizon = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct MaximalProbe {
  double hurst = 0.0;
  double p = 0.0;
  std::vector<MaximalRow> rows;
  SlopeFit fit;
  double expected_slope = 0.0;  ///< p H
};

/// Monte Carlo E[sup_{s <= t} |B^H_s|^p] for each t, regressed on t.
MaximalProbe maximal_inequality_probe(double hurst, double p, std::span<const double> horizons,
                                      std::size_t paths, std::uint64_t seed, std::size_t grid_points = 1024,
                                      FgnMethod method = FgnMethod::kDaviesHarte, int threads = 1);

struct MomentRow {
  double step = 0.0;
  double estimate = 0.0;  ///< E[max_k |Z(t_k)|^p], averaged over particles and replications
  double std_error = 0.0;
  bool blowup = false;    ///< a non-finite state appeared
};

struct MomentProbe {
  std::vector<MomentRow> rows;
  double ratio = 0.0;  ///< max/min estimate across finite rows
  bool bounded = false;  ///< ratio < kMomentRatioBound and no blow-up
  bool any_blowup = false;
};

inline constexpr double kMomentRatioBound = 2.0;

struct MomentStudy {
  ModelSpec model;
  double horizon = 1.0;
  std::vector<int> levels{5, 6, 7, 8, 9};  ///< steps 2^-level
  std::size_t particles = 200;
  double hurst = 0.7;
  std::uint64_t seed = 0;
  double p = 4.0;
  std::size_t repeats = 4;
  FgnMethod method = FgnMethod::kDaviesHarte;
  int threads = 1;
};

MomentProbe moment_bound_probe(const MomentStudy& study);

}  // namespace mvfbm
