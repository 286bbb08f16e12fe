#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mvfbm {

/// Non-owning view of an equal-weight sample cloud in R^d. Samples are stored
/// contiguously, sample j occupying [j*dim, (j+1)*dim).
class MeasureView {
 public:
  MeasureView(std::span<const double> samples, std::size_t dim);

  std::size_t size() const noexcept { return samples_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> sample(std::size_t j) const noexcept { return samples_.subspan(j * dim_, dim_); }
  std::span<const double> data() const noexcept { return samples_; }

 private:
  std::span<const double> samples_;
  std::size_t dim_;
};

/// Owning empirical measure (1/N) sum_j delta_{x_j}.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<double> samples, std::size_t dim);
  /// One-dimensional convenience constructor.
  explicit EmpiricalMeasure(std::vector<double> samples) : EmpiricalMeasure(std::move(samples), 1) {}

  std::size_t size() const noexcept { return samples_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  MeasureView view() const noexcept { return {samples_, dim_}; }
  operator MeasureView() const noexcept { return view(); }  // NOLINT(google-explicit-constructor)

 private:
  std::vector<double> samples_;
  std::size_t dim_;
};

/// ((1/N) sum |x_j|^q)^{1/q}, Euclidean norm.
double moment(MeasureView mu, double q);

/// Coordinatewise average, summed in ascending sample order.
std::vector<double> mean(MeasureView mu);

using Kernel = std::function<void(std::span<const double> x, std::span<double> out)>;

/// (1/N) sum_j f(x_j), summed in ascending sample order.
std::vector<double> integrate(const Kernel& f, MeasureView mu, std::size_t out_dim);

/// Exact W_p between equal-size one-dimensional clouds via sorted coupling.
double wasserstein_1d(MeasureView mu, MeasureView nu, double p);

/// Largest N accepted by `wasserstein_assignment`.
inline constexpr std::size_t kAssignmentMaxN = 2048;

/// Exact W_p between equal-size clouds in R^d via optimal assignment.
double wasserstein_assignment(MeasureView mu, MeasureView nu, double p);

/// Result of a square linear assignment problem.
struct Assignment {
  std::vector<std::size_t> column_of_row;
  double total_cost = 0.0;
};

/// Minimum-cost perfect matching on an n x n row-major cost matrix
/// (shortest augmenting path with potentials, O(n^3)). Ties go to the lowest
/// column index.
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace mvfbm
