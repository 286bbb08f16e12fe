#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mvfbm/fgn.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/model.hpp"

namespace mvfbm {

/// Uniform grid t_k = k * step, k = -delay_steps .. horizon_steps, with the
/// delay and horizon both integer multiples of the step.
class TimeGrid {
 public:
  /// step = delay / delay_steps; horizon must be a whole number of steps
  /// (relative tolerance 1e-9), otherwise UsageError naming the nearest valid horizon.
  TimeGrid(double delay, std::size_t delay_steps, double horizon);

  /// Grid with step 2^-level; the delay must be a whole number of such steps.
  static TimeGrid dyadic(double delay, int level, double horizon);

  double step() const noexcept { return step_; }
  std::size_t delay_steps() const noexcept { return delay_steps_; }
  std::size_t horizon_steps() const noexcept { return horizon_steps_; }
  double delay() const noexcept { return delay_; }
  double horizon() const noexcept { return step_ * static_cast<double>(horizon_steps_); }
  double time(std::ptrdiff_t k) const noexcept { return static_cast<double>(k) * step_; }
  /// Total stored rows, delay_steps + horizon_steps + 1.
  std::size_t rows() const noexcept { return delay_steps_ + horizon_steps_ + 1; }

  /// The grid `factor` times coarser; factor must divide both step counts.
  TimeGrid coarsened(std::size_t factor) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double delay_;
  double step_;
  std::size_t delay_steps_;
  std::size_t horizon_steps_;
};

inline TimeGrid build_grid(double delay, std::size_t delay_steps, double horizon) {
  return TimeGrid(delay, delay_steps, horizon);
}

/// States Z^{i,N}(t_k) of all particles on the whole grid, plus replay metadata.
/// Storage is time-major so each row is the empirical measure at t_k.
struct EnsembleTrajectory {
  TimeGrid grid;
  std::size_t particles = 0;
  std::size_t dim = 1;
  std::string model_id;
  std::uint64_t seed = 0;
  Hurst hurst{0.5};
  FgnMethod method = FgnMethod::kDaviesHarte;
  std::vector<double> states;

  std::span<const double> row(std::ptrdiff_t k) const;
  std::span<double> row(std::ptrdiff_t k);
  std::span<const double> state(std::size_t particle, std::ptrdiff_t k) const;
  MeasureView law(std::ptrdiff_t k) const { return {row(k), dim}; }
  std::span<const double> terminal(std::size_t particle) const {
    return state(particle, static_cast<std::ptrdiff_t>(grid.horizon_steps()));
  }
  bool all_finite() const noexcept;
};

/// Rows k <= 0 filled with xi^i(t_k); later rows zero.
EnsembleTrajectory init_ensemble(const ModelSpec& model, const TimeGrid& grid, std::size_t particles,
                                 std::uint64_t seed = 0);

struct StepOptions {
  int threads = 1;
  /// Optional permutation of particle indices; the result does not depend on it.
  std::span<const std::size_t> update_order{};
};

/// One Euler-Maruyama step from t_k to t_{k+1} for every particle. Coefficients
/// see the laws at t_k and t_{k-M}, which are rows already fixed before the update.
/// `noise` holds N*d increments, particle-major.
void em_step(const ModelSpec& model, EnsembleTrajectory& traj, std::ptrdiff_t k, std::span<const double> noise,
             const StepOptions& options = {});

/// fGn increments for every (particle, component) stream over the horizon.
/// Stream s = particle * dim + component, stored as data[s * steps + k].
struct NoiseField {
  std::size_t streams = 0;
  std::size_t steps = 0;
  double step = 0.0;
  std::vector<double> data;

  std::span<const double> stream(std::size_t s) const { return {data.data() + s * steps, steps}; }
};

NoiseField generate_noise(std::size_t streams, std::size_t steps, double step, Hurst hurst, std::uint64_t seed,
                          FgnMethod method, int threads = 1);
NoiseField coarsen(const NoiseField& noise, std::size_t factor);

struct RunOptions {
  FgnMethod method = FgnMethod::kDaviesHarte;
  int threads = 1;
};

/// Interacting particle EM scheme driven by pre-generated noise.
EnsembleTrajectory run_with_noise(const ModelSpec& model, const TimeGrid& grid, std::size_t particles, Hurst hurst,
                                  std::uint64_t seed, const NoiseField& noise, const RunOptions& options = {});

/// Full run: one noise block per particle stream, then M_T steps.
EnsembleTrajectory run(const ModelSpec& model, const TimeGrid& grid, std::size_t particles, Hurst hurst,
                       std::uint64_t seed, const RunOptions& options = {});

/// Fine and coarse runs driven by the same fBm paths: the coarse run consumes
/// block sums of the fine increments.
std::pair<EnsembleTrajectory, EnsembleTrajectory> coupled_pair_run(const ModelSpec& model,
                                                                   const TimeGrid& fine_grid,
                                                                   std::size_t coarsen_factor,
                                                                   std::size_t particles, Hurst hurst,
                                                                   std::uint64_t seed,
                                                                   const RunOptions& options = {});

}  // namespace mvfbm
