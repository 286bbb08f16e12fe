#include "mvfbm/experiments.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mvfbm/errors.hpp"
#include "mvfbm/rng.hpp"

namespace mvfbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed-derivation tags, one per study family.
constexpr std::uint64_t kConvergenceTag = 0xC0;
constexpr std::uint64_t kChaosTag = 0xC1;
constexpr std::uint64_t kMaximalTag = 0xC2;
constexpr std::uint64_t kMomentTag = 0xC3;

void check_coupling(const EnsembleTrajectory& fine, const EnsembleTrajectory& coarse) {
  if (fine.seed != coarse.seed || fine.particles != coarse.particles || fine.dim != coarse.dim ||
      fine.model_id != coarse.model_id || !(fine.hurst == coarse.hurst) ||
      std::abs(fine.grid.horizon() - coarse.grid.horizon()) > 1e-12 * fine.grid.horizon())
    throw UsageError("strong_error: trajectories are not a coupled pair (seed, N, model, H or T differ)");
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double sq = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(sq);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error, summed in index order.
MeanSe mean_se(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double m = sum / n;
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

int outer_threads(int threads, std::size_t jobs) {
  return std::max(1, std::min<int>(threads, static_cast<int>(jobs)));
}

}  // namespace

double strong_error(const EnsembleTrajectory& fine, const EnsembleTrajectory& coarse, double p) {
  if (!(p > 0.0)) throw DomainError("strong_error: p must be positive");
  check_coupling(fine, coarse);
  double acc = 0.0;
  for (std::size_t i = 0; i < fine.particles; ++i) acc += std::pow(distance(fine.terminal(i), coarse.terminal(i)), p);
  return std::pow(acc / static_cast<double>(fine.particles), 1.0 / p);
}

double strong_error_sup(const EnsembleTrajectory& fine, const EnsembleTrajectory& coarse, double p) {
  if (!(p > 0.0)) throw DomainError("strong_error_sup: p must be positive");
  check_coupling(fine, coarse);
  const std::size_t fine_steps = fine.grid.horizon_steps();
  const std::size_t coarse_steps = coarse.grid.horizon_steps();
  if (coarse_steps == 0 || fine_steps % coarse_steps != 0)
    throw UsageError("strong_error_sup: coarse grid must be nested in the fine grid");
  const std::size_t factor = fine_steps / coarse_steps;
  double acc = 0.0;
  for (std::size_t i = 0; i < fine.particles; ++i) {
    double worst = 0.0;
    for (std::size_t k = 0; k <= coarse_steps; ++k) {
      const auto kc = static_cast<std::ptrdiff_t>(k);
      const auto kf = static_cast<std::ptrdiff_t>(k * factor);
      worst = std::max(worst, distance(fine.state(i, kf), coarse.state(i, kc)));
    }
    acc += std::pow(worst, p);
  }
  return std::pow(acc / static_cast<double>(fine.particles), 1.0 / p);
}

SlopeFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("fit_log_log: x and y lengths differ");
  if (x.size() < 2) throw UsageError("fit_log_log: need at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_log_log: values must be positive");
    lx[i] = std::log2(x[i]);
    ly[i] = std::log2(y[i]);
  }
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / nd;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw UsageError("fit_log_log: x values must not all coincide");
  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n < 3) {
    fit.slope_stderr = fit.ci_low = fit.ci_high = kNaN;
    return fit;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += r * r;
  }
  fit.slope_stderr = std::sqrt(rss / (nd - 2.0) / sxx);
  const boost::math::students_t dist(nd - 2.0);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - q * fit.slope_stderr;
  fit.ci_high = fit.slope + q * fit.slope_stderr;
  return fit;
}

std::vector<ErrorTable> convergence_study(const ConvergenceStudy& study) {
  if (study.coarse_levels.empty()) throw UsageError("convergence study needs at least one coarse level");
  if (study.repeats == 0) throw UsageError("convergence study needs repeats >= 1");
  if (study.particles == 0) throw UsageError("convergence study needs N >= 1");
  for (int level : study.coarse_levels)
    if (level > study.fine_level || level < 0)
      throw UsageError("coarse level " + std::to_string(level) + " must not exceed the fine level " +
                       std::to_string(study.fine_level));
  if (study.norm == ErrorNorm::kSupremum)
    for (double h : study.hursts)
      if (h < 0.5) throw UsageError("supremum-norm errors are only supported for H > 1/2; use terminal errors");

  const TimeGrid fine_grid = TimeGrid::dyadic(study.model.delay, study.fine_level, study.horizon);
  std::vector<int> levels = study.coarse_levels;
  std::sort(levels.begin(), levels.end());  // coarsest first = step descending
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::size_t> factors;
  for (int level : levels) {
    const std::size_t f = std::size_t{1} << (study.fine_level - level);
    (void)fine_grid.coarsened(f);  // divisibility check
    factors.push_back(f);
  }

  std::vector<ErrorTable> tables;
  for (double h_value : study.hursts) {
    const Hurst hurst(h_value);
    check_hurst_regime(study.model, hurst);
    // errs[r * L + l]
    std::vector<double> errs(study.repeats * factors.size());
    const auto repeats = static_cast<std::ptrdiff_t>(study.repeats);
    const int team = outer_threads(study.threads, study.repeats);
    std::string failure;
#pragma omp parallel for num_threads(team) schedule(dynamic) if (team > 1)
    for (std::ptrdiff_t r = 0; r < repeats; ++r) {
      try {
        const std::uint64_t seed = rng::derive_seed(study.seed, kConvergenceTag, static_cast<std::uint64_t>(r));
        const RunOptions options{study.method, team > 1 ? 1 : study.threads};
        const NoiseField noise = generate_noise(study.particles * study.model.dim, fine_grid.horizon_steps(),
                                                fine_grid.step(), hurst, seed, study.method, options.threads);
        const EnsembleTrajectory fine =
            run_with_noise(study.model, fine_grid, study.particles, hurst, seed, noise, options);
        for (std::size_t l = 0; l < factors.size(); ++l) {
          const EnsembleTrajectory coarse =
              run_with_noise(study.model, fine_grid.coarsened(factors[l]), study.particles, hurst, seed,
                             coarsen(noise, factors[l]), options);
          errs[static_cast<std::size_t>(r) * factors.size() + l] =
              study.norm == ErrorNorm::kTerminal ? strong_error(fine, coarse, study.p)
                                                 : strong_error_sup(fine, coarse, study.p);
        }
      } catch (const std::exception& e) {
#pragma omp critical
        failure = e.what();
      }
    }
    if (!failure.empty()) throw NumericalError("convergence study failed: " + failure);

    ErrorTable table;
    table.hurst = h_value;
    table.theoretical_exponent = std::min(study.model.holder_exponent, h_value);
    std::vector<double> xs, ys;
    for (std::size_t l = 0; l < factors.size(); ++l) {
      std::vector<double> column(study.repeats);
      for (std::size_t r = 0; r < study.repeats; ++r) column[r] = errs[r * factors.size() + l];
      const MeanSe s = mean_se(column);
      ErrorRow row{std::ldexp(1.0, -levels[l]), s.mean, study.repeats, s.se, !(s.mean > 0.0)};
      if (row.degenerate) {
        table.warnings.push_back("error is zero at step 2^-" + std::to_string(levels[l]) +
                                 "; row excluded from the fit");
      } else if (!std::isfinite(row.err)) {
        row.degenerate = true;
        table.warnings.push_back("non-finite error at step 2^-" + std::to_string(levels[l]) +
                                 " (moment blow-up); row excluded from the fit");
      } else {
        xs.push_back(row.step);
        ys.push_back(row.err);
      }
      table.rows.push_back(row);
    }
    if (xs.size() >= 2) {
      table.fit = fit_log_log(xs, ys);
      table.fit_valid = true;
    } else {
      table.warnings.push_back("fewer than two usable rows; slope undefined");
    }
    table.strictly_decreasing = true;
    for (std::size_t l = 1; l < table.rows.size(); ++l)
      if (!(table.rows[l].err < table.rows[l - 1].err)) table.strictly_decreasing = false;
    tables.push_back(std::move(table));
  }
  return tables;
}

ChaosTable chaos_study(const ChaosStudy& study) {
  if (study.particle_counts.empty()) throw UsageError("chaos study needs a list of particle counts");
  if (!std::is_sorted(study.particle_counts.begin(), study.particle_counts.end()) ||
      study.particle_counts.front() == 0)
    throw UsageError("chaos study particle counts must be positive and ascending");
  if (study.reference_particles < 2 * study.particle_counts.back())
    throw UsageError("chaos study reference N_ref=" + std::to_string(study.reference_particles) +
                     " must be at least twice the largest N=" + std::to_string(study.particle_counts.back()));
  if (study.repeats == 0) throw UsageError("chaos study needs repeats >= 1");
  if (!(study.p > 0.0)) throw DomainError("chaos study: p must be positive");
  const Hurst hurst(study.hurst);
  check_hurst_regime(study.model, hurst);

  const std::size_t counts = study.particle_counts.size();
  std::vector<double> gaps(study.repeats * counts);
  const auto repeats = static_cast<std::ptrdiff_t>(study.repeats);
  const int team = outer_threads(study.threads, study.repeats);
  std::string failure;
#pragma omp parallel for num_threads(team) schedule(dynamic) if (team > 1)
  for (std::ptrdiff_t r = 0; r < repeats; ++r) {
    try {
      const std::uint64_t seed = rng::derive_seed(study.seed, kChaosTag, static_cast<std::uint64_t>(r));
      const RunOptions options{study.method, team > 1 ? 1 : study.threads};
      const std::size_t d = study.model.dim;
      const NoiseField noise = generate_noise(study.reference_particles * d, study.grid.horizon_steps(),
                                              study.grid.step(), hurst, seed, study.method, options.threads);
      const EnsembleTrajectory reference =
          run_with_noise(study.model, study.grid, study.reference_particles, hurst, seed, noise, options);
      for (std::size_t c = 0; c < counts; ++c) {
        const std::size_t n = study.particle_counts[c];
        // Streams 0..N-1 of the reference noise drive the smaller system.
        const EnsembleTrajectory small = run_with_noise(study.model, study.grid, n, hurst, seed, noise, options);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::pow(distance(reference.terminal(i), small.terminal(i)), study.p);
        gaps[static_cast<std::size_t>(r) * counts + c] = std::pow(acc / static_cast<double>(n), 1.0 / study.p);
      }
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError("chaos study failed: " + failure);

  ChaosTable table;
  std::vector<double> xs, ys;
  for (std::size_t c = 0; c < counts; ++c) {
    std::vector<double> column(study.repeats);
    for (std::size_t r = 0; r < study.repeats; ++r) column[r] = gaps[r * counts + c];
    const MeanSe s = mean_se(column);
    table.rows.push_back({study.particle_counts[c], s.mean, s.se, study.repeats});
    if (s.mean > 0.0 && std::isfinite(s.mean)) {
      xs.push_back(static_cast<double>(study.particle_counts[c]));
      ys.push_back(s.mean);
    }
  }
  if (xs.size() >= 2) {
    table.fit = fit_log_log(xs, ys);
    table.fit_valid = true;
  }
  table.non_increasing = true;
  for (std::size_t c = 1; c < counts; ++c)
    if (!(table.rows[c].gap <= table.slack * table.rows[c - 1].gap)) table.non_increasing = false;
  const double periods = std::floor(study.grid.horizon() / study.model.delay + 1e-9);
  table.lambda = std::pow((study.p - 1.0) / study.p, periods);
  return table;
}

MaximalProbe maximal_inequality_probe(double hurst_value, double p, std::span<const double> horizons,
                                      std::size_t paths, std::uint64_t seed, std::size_t grid_points,
                                      FgnMethod method, int threads) {
  if (!(p > 0.0)) throw DomainError("maximal_inequality_probe: p must be positive");
  if (horizons.size() < 2) throw UsageError("maximal_inequality_probe: need at least two horizons");
  for (double t : horizons)
    if (!(t > 0.0)) throw DomainError("maximal_inequality_probe: horizons must be positive");
  const auto [lo, hi] = std::minmax_element(horizons.begin(), horizons.end());
  if (*hi < 10.0 * *lo) throw UsageError("maximal_inequality_probe: horizons must span at least one decade");
  if (paths < 10000) throw UsageError("maximal_inequality_probe: at least 10^4 paths are required");
  if (grid_points == 0) throw UsageError("maximal_inequality_probe: grid_points must be >= 1");
  const Hurst hurst(hurst_value);

  MaximalProbe probe;
  probe.hurst = hurst_value;
  probe.p = p;
  probe.expected_slope = p * hurst_value;
  std::vector<double> xs, ys;
  for (std::size_t ti = 0; ti < horizons.size(); ++ti) {
    const double t = horizons[ti];
    const FgnSampler sampler(grid_points, t / static_cast<double>(grid_points), hurst, method);
    const std::uint64_t sub_seed = rng::derive_seed(seed, kMaximalTag, ti);
    std::vector<double> values(paths);
    const auto count = static_cast<std::ptrdiff_t>(paths);
#pragma omp parallel num_threads(threads) if (threads > 1)
    {
      std::vector<double> increments(grid_points);
#pragma omp for schedule(static)
      for (std::ptrdiff_t s = 0; s < count; ++s) {
        sampler.sample_into(sub_seed, static_cast<std::uint64_t>(s), increments);
        double level = 0.0, worst = 0.0;
        for (double dB : increments) {
          level += dB;
          worst = std::max(worst, std::abs(level));
        }
        values[static_cast<std::size_t>(s)] = std::pow(worst, p);
      }
    }
    const MeanSe s = mean_se(values);
    probe.rows.push_back({t, s.mean, s.se});
    xs.push_back(t);
    ys.push_back(s.mean);
  }
  probe.fit = fit_log_log(xs, ys);
  return probe;
}

MomentProbe moment_bound_probe(const MomentStudy& study) {
  if (study.levels.empty()) throw UsageError("moment probe needs at least one grid level");
  if (study.repeats == 0 || study.particles == 0) throw UsageError("moment probe needs N >= 1 and repeats >= 1");
  if (!(study.p > 0.0)) throw DomainError("moment probe: p must be positive");
  const Hurst hurst(study.hurst);
  check_hurst_regime(study.model, hurst);

  MomentProbe probe;
  for (int level : study.levels) {
    const TimeGrid grid = TimeGrid::dyadic(study.model.delay, level, study.horizon);
    std::vector<double> per_repeat(study.repeats);
    std::vector<char> blew(study.repeats, 0);
    const auto repeats = static_cast<std::ptrdiff_t>(study.repeats);
    const int team = outer_threads(study.threads, study.repeats);
    std::string failure;
#pragma omp parallel for num_threads(team) schedule(dynamic) if (team > 1)
    for (std::ptrdiff_t r = 0; r < repeats; ++r) {
      try {
        const std::uint64_t seed = rng::derive_seed(study.seed, kMomentTag, static_cast<std::uint64_t>(r));
        const RunOptions options{study.method, team > 1 ? 1 : study.threads};
        const EnsembleTrajectory traj = run(study.model, grid, study.particles, hurst, seed, options);
        const auto u = static_cast<std::size_t>(r);
        if (!traj.all_finite()) {
          blew[u] = 1;
          per_repeat[u] = std::numeric_limits<double>::infinity();
          continue;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < study.particles; ++i) {
          double worst = 0.0;
          for (std::size_t k = 0; k <= grid.horizon_steps(); ++k) {
            const auto z = traj.state(i, static_cast<std::ptrdiff_t>(k));
            const std::vector<double> origin(z.size(), 0.0);
            worst = std::max(worst, distance(z, origin));
          }
          acc += std::pow(worst, study.p);
        }
        per_repeat[u] = acc / static_cast<double>(study.particles);
      } catch (const std::exception& e) {
#pragma omp critical
        failure = e.what();
      }
    }
    if (!failure.empty()) throw NumericalError("moment probe failed: " + failure);
    MomentRow row;
    row.step = grid.step();
    row.blowup = std::any_of(blew.begin(), blew.end(), [](char b) { return b != 0; });
    if (row.blowup) {
      row.estimate = std::numeric_limits<double>::infinity();
      row.std_error = kNaN;
    } else {
      const MeanSe s = mean_se(per_repeat);
      row.estimate = s.mean;
      row.std_error = s.se;
    }
    probe.rows.push_back(row);
  }
  std::sort(probe.rows.begin(), probe.rows.end(), [](const MomentRow& a, const MomentRow& b) { return a.step > b.step; });

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const MomentRow& row : probe.rows) {
    if (row.blowup) {
      probe.any_blowup = true;
      continue;
    }
    lo = std::min(lo, row.estimate);
    hi = std::max(hi, row.estimate);
  }
  if (hi == 0.0 && lo == 0.0) {
    probe.ratio = 1.0;
  } else if (lo > 0.0 && std::isfinite(lo)) {
    probe.ratio = hi / lo;
  } else {
    probe.ratio = kNaN;
  }
  probe.bounded = !probe.any_blowup && probe.ratio < kMomentRatioBound;
  return probe;
}

}  // namespace mvfbm
