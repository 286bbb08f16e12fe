#include "mvfbm/solver.hpp"

#include <cmath>
#include <string>

#include "mvfbm/errors.hpp"

namespace mvfbm {

TimeGrid::TimeGrid(double delay, std::size_t delay_steps, double horizon) : delay_(delay) {
  if (!(delay > 0.0)) throw UsageError("grid: delay must be positive");
  if (delay_steps == 0) throw UsageError("grid: delay step count M must be >= 1");
  if (!(horizon > 0.0)) throw UsageError("grid: horizon T must be positive");
  delay_steps_ = delay_steps;
  step_ = delay / static_cast<double>(delay_steps);
  const double ratio = horizon / step_;
  const double nearest = std::round(ratio);
  if (nearest < 1.0 || std::abs(ratio - nearest) > 1e-9 * ratio) {
    const double valid = std::max(nearest, 1.0) * step_;
    throw UsageError("grid: T=" + std::to_string(horizon) + " is not a whole number of steps of size " +
                     std::to_string(step_) + "; nearest valid T is " + std::to_string(valid));
  }
  horizon_steps_ = static_cast<std::size_t>(nearest);
}

TimeGrid TimeGrid::dyadic(double delay, int level, double horizon) {
  const double m = std::ldexp(delay, level);
  const double rounded = std::round(m);
  if (rounded < 1.0 || std::abs(m - rounded) > 1e-9 * m)
    throw UsageError("grid: delay " + std::to_string(delay) + " is not a multiple of 2^-" + std::to_string(level));
  return TimeGrid(delay, static_cast<std::size_t>(rounded), horizon);
}

TimeGrid TimeGrid::coarsened(std::size_t factor) const {
  if (factor == 0 || delay_steps_ % factor != 0 || horizon_steps_ % factor != 0)
    throw UsageError("coarsening factor " + std::to_string(factor) + " must divide M=" +
                     std::to_string(delay_steps_) + " and M_T=" + std::to_string(horizon_steps_));
  return TimeGrid(delay_, delay_steps_ / factor, horizon());
}

std::span<const double> EnsembleTrajectory::row(std::ptrdiff_t k) const {
  const auto m = static_cast<std::ptrdiff_t>(grid.delay_steps());
  if (k < -m || k > static_cast<std::ptrdiff_t>(grid.horizon_steps()))
    throw UsageError("trajectory row " + std::to_string(k) + " out of range");
  const std::size_t width = particles * dim;
  return {states.data() + static_cast<std::size_t>(k + m) * width, width};
}

std::span<double> EnsembleTrajectory::row(std::ptrdiff_t k) {
  const auto r = std::as_const(*this).row(k);
  return {const_cast<double*>(r.data()), r.size()};
}

std::span<const double> EnsembleTrajectory::state(std::size_t particle, std::ptrdiff_t k) const {
  if (particle >= particles) throw UsageError("particle index out of range");
  return row(k).subspan(particle * dim, dim);
}

bool EnsembleTrajectory::all_finite() const noexcept {
  for (double v : states)
    if (!std::isfinite(v)) return false;
  return true;
}

EnsembleTrajectory init_ensemble(const ModelSpec& model, const TimeGrid& grid, std::size_t particles,
                                 std::uint64_t seed) {
  if (particles == 0) throw UsageError("ensemble needs N >= 1 particles");
  if (std::abs(grid.delay() - model.delay) > 1e-12 * model.delay)
    throw UsageError("grid delay does not match the model delay");
  EnsembleTrajectory traj{grid, particles, model.dim, model.id, seed, Hurst{0.5}, FgnMethod::kDaviesHarte,
                          std::vector<double>(grid.rows() * particles * model.dim, 0.0)};
  const auto m = static_cast<std::ptrdiff_t>(grid.delay_steps());
  for (std::ptrdiff_t k = -m; k <= 0; ++k) {
    // t_{-M} is pinned to -delay exactly so the endpoint never falls outside the path's domain.
    const double theta = k == -m ? -model.delay : grid.time(k);
    auto row = traj.row(k);
    for (std::size_t i = 0; i < particles; ++i)
      model.evaluate_initial(theta, seed, i, row.subspan(i * model.dim, model.dim));
  }
  return traj;
}

void em_step(const ModelSpec& model, EnsembleTrajectory& traj, std::ptrdiff_t k, std::span<const double> noise,
             const StepOptions& options) {
  const std::size_t n = traj.particles;
  const std::size_t d = traj.dim;
  if (model.dim != d) throw UsageError("em_step: model and trajectory dimensions differ");
  if (k < 0 || k >= static_cast<std::ptrdiff_t>(traj.grid.horizon_steps()))
    throw UsageError("em_step: step index " + std::to_string(k) + " out of range");
  if (noise.size() != n * d) throw UsageError("em_step: expected N*d noise increments");
  if (!options.update_order.empty() && options.update_order.size() != n)
    throw UsageError("em_step: update order must list every particle");

  const std::ptrdiff_t lag = k - static_cast<std::ptrdiff_t>(traj.grid.delay_steps());
  const MeasureView law = traj.law(k);
  const MeasureView law_delayed = traj.law(lag);
  const double t = traj.grid.time(k);
  const double dt = traj.grid.step();

  std::vector<double> beta(d * d);
  model.diffusion(t, law, law_delayed, beta);

  std::span<double> next = traj.row(k + 1);
  const std::span<const double> current = traj.row(k);
  const std::span<const double> delayed = traj.row(lag);
  const auto count = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel num_threads(options.threads) if (options.threads > 1)
  {
    std::vector<double> drift(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < count; ++idx) {
      const std::size_t i =
          options.update_order.empty() ? static_cast<std::size_t>(idx) : options.update_order[idx];
      const auto x = current.subspan(i * d, d);
      model.drift(t, x, delayed.subspan(i * d, d), law, law_delayed, drift);
      for (std::size_t c = 0; c < d; ++c) {
        double diffusion = 0.0;
        for (std::size_t r = 0; r < d; ++r) diffusion += beta[c * d + r] * noise[i * d + r];
        next[i * d + c] = x[c] + drift[c] * dt + diffusion;
      }
    }
  }
}

NoiseField generate_noise(std::size_t streams, std::size_t steps, double step, Hurst hurst, std::uint64_t seed,
                          FgnMethod method, int threads) {
  const FgnSampler sampler(steps, step, hurst, method);
  NoiseField field{streams, steps, step, std::vector<double>(streams * steps)};
  const auto count = static_cast<std::ptrdiff_t>(streams);
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    const auto u = static_cast<std::size_t>(s);
    sampler.sample_into(seed, u, {field.data.data() + u * steps, steps});
  }
  return field;
}

NoiseField coarsen(const NoiseField& noise, std::size_t factor) {
  if (factor == 0 || noise.steps % factor != 0)
    throw UsageError("noise coarsening factor must divide the step count");
  NoiseField out{noise.streams, noise.steps / factor, noise.step * static_cast<double>(factor), {}};
  out.data.reserve(noise.streams * out.steps);
  for (std::size_t s = 0; s < noise.streams; ++s) {
    const std::vector<double> c = coarsen(noise.stream(s), factor);
    out.data.insert(out.data.end(), c.begin(), c.end());
  }
  return out;
}

EnsembleTrajectory run_with_noise(const ModelSpec& model, const TimeGrid& grid, std::size_t particles, Hurst hurst,
                                  std::uint64_t seed, const NoiseField& noise, const RunOptions& options) {
  check_hurst_regime(model, hurst);
  const std::size_t d = model.dim;
  if (noise.streams < particles * d || noise.steps != grid.horizon_steps() ||
      std::abs(noise.step - grid.step()) > 1e-12 * grid.step())
    throw UsageError("noise field does not match the grid and particle count");

  EnsembleTrajectory traj = init_ensemble(model, grid, particles, seed);
  traj.hurst = hurst;
  traj.method = options.method;

  std::vector<double> increments(particles * d);
  StepOptions step_options{options.threads, {}};
  for (std::size_t k = 0; k < grid.horizon_steps(); ++k) {
    for (std::size_t s = 0; s < particles * d; ++s) increments[s] = noise.data[s * noise.steps + k];
    em_step(model, traj, static_cast<std::ptrdiff_t>(k), increments, step_options);
  }
  return traj;
}

EnsembleTrajectory run(const ModelSpec& model, const TimeGrid& grid, std::size_t particles, Hurst hurst,
                       std::uint64_t seed, const RunOptions& options) {
  check_hurst_regime(model, hurst);
  const NoiseField noise =
      generate_noise(particles * model.dim, grid.horizon_steps(), grid.step(), hurst, seed, options.method,
                     options.threads);
  return run_with_noise(model, grid, particles, hurst, seed, noise, options);
}

std::pair<EnsembleTrajectory, EnsembleTrajectory> coupled_pair_run(const ModelSpec& model,
                                                                   const TimeGrid& fine_grid,
                                                                   std::size_t coarsen_factor,
                                                                   std::size_t particles, Hurst hurst,
                                                                   std::uint64_t seed, const RunOptions& options) {
  const TimeGrid coarse_grid = fine_grid.coarsened(coarsen_factor);
  check_hurst_regime(model, hurst);
  const NoiseField fine_noise = generate_noise(particles * model.dim, fine_grid.horizon_steps(), fine_grid.step(),
                                               hurst, seed, options.method, options.threads);
  EnsembleTrajectory fine = run_with_noise(model, fine_grid, particles, hurst, seed, fine_noise, options);
  EnsembleTrajectory coarse =
      run_with_noise(model, coarse_grid, particles, hurst, seed, coarsen(fine_noise, coarsen_factor), options);
  return {std::move(fine), std::move(coarse)};
}

}  // namespace mvfbm
