#include "mvfbm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mvfbm/errors.hpp"

namespace mvfbm {

namespace {

double norm_pow(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() == 1) return std::pow(std::abs(a[0] - b[0]), p);
  double sq = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
  return p == 2.0 ? sq : std::pow(std::sqrt(sq), p);
}

void require_same_shape(MeasureView mu, MeasureView nu) {
  if (mu.dim() != nu.dim()) throw UsageError("measures live in different dimensions");
  if (mu.size() != nu.size())
    throw UsageError("Wasserstein distance requires equal sample counts (got " + std::to_string(mu.size()) +
                     " and " + std::to_string(nu.size()) + ")");
}

void require_order(double p) {
  if (!(p >= 1.0)) throw DomainError("Wasserstein/moment order must be >= 1");
}

}  // namespace

MeasureView::MeasureView(std::span<const double> samples, std::size_t dim) : samples_(samples), dim_(dim) {
  if (dim == 0) throw UsageError("measure dimension must be >= 1");
  if (samples.empty() || samples.size() % dim != 0)
    throw UsageError("measure needs N >= 1 samples of dimension " + std::to_string(dim));
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples, std::size_t dim)
    : samples_(std::move(samples)), dim_(dim) {
  MeasureView check(samples_, dim_);
  (void)check;
}

double moment(MeasureView mu, double q) {
  require_order(q);
  const std::vector<double> origin(mu.dim(), 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) acc += norm_pow(mu.sample(j), origin, q);
  return std::pow(acc / static_cast<double>(mu.size()), 1.0 / q);
}

std::vector<double> mean(MeasureView mu) {
  std::vector<double> out(mu.dim(), 0.0);
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto x = mu.sample(j);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += x[c];
  }
  for (double& v : out) v /= static_cast<double>(mu.size());
  return out;
}

std::vector<double> integrate(const Kernel& f, MeasureView mu, std::size_t out_dim) {
  std::vector<double> acc(out_dim, 0.0), value(out_dim);
  for (std::size_t j = 0; j < mu.size(); ++j) {
    std::fill(value.begin(), value.end(), 0.0);
    f(mu.sample(j), value);
    for (std::size_t c = 0; c < out_dim; ++c) acc[c] += value[c];
  }
  for (double& v : acc) v /= static_cast<double>(mu.size());
  return acc;
}

double wasserstein_1d(MeasureView mu, MeasureView nu, double p) {
  require_order(p);
  require_same_shape(mu, nu);
  if (mu.dim() != 1) throw UsageError("wasserstein_1d requires one-dimensional measures");
  std::vector<double> x(mu.data().begin(), mu.data().end());
  std::vector<double> y(nu.data().begin(), nu.data().end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i] - y[i]), p);
  return std::pow(acc / static_cast<double>(x.size()), 1.0 / p);
}

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw UsageError("assignment cost matrix must be n x n");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result{std::vector<std::size_t>(n), 0.0};
  for (std::size_t j = 1; j <= n; ++j) result.column_of_row[row_of_col[j] - 1] = j - 1;
  // Sum in row order so the reported optimum is independent of solver internals.
  for (std::size_t i = 0; i < n; ++i) result.total_cost += cost[i * n + result.column_of_row[i]];
  return result;
}

double wasserstein_assignment(MeasureView mu, MeasureView nu, double p) {
  require_order(p);
  require_same_shape(mu, nu);
  const std::size_t n = mu.size();
  if (n > kAssignmentMaxN)
    throw UsageError("wasserstein_assignment: N=" + std::to_string(n) + " exceeds the limit " +
                     std::to_string(kAssignmentMaxN) + "; use wasserstein_1d for scalar data or subsample");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = norm_pow(mu.sample(i), nu.sample(j), p);
  const Assignment a = solve_assignment(cost, n);
  return std::pow(a.total_cost / static_cast<double>(n), 1.0 / p);
}

}  // namespace mvfbm
