#include <doctest.h>

#include <cmath>
#include <vector>

#include "mvfbm/errors.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/rng.hpp"
#include "oracles.hpp"

using namespace mvfbm;

namespace {

std::vector<double> cloud(std::uint64_t seed, std::size_t n, std::size_t d) {
  const rng::NormalStream s(seed, 0, rng::Domain::kTest);
  std::vector<double> v(n * d);
  s.fill_normal(v);
  return v;
}

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("moment and mean examples") {
    const EmpiricalMeasure mu({1.0, -1.0});
    CHECK(moment(mu, 2.0) == 1.0);
    CHECK(mean(mu) == std::vector<double>{0.0});
    const EmpiricalMeasure nu({3.0, 4.0, 0.0, 0.0}, 2);
    CHECK(moment(nu, 2.0) == doctest::Approx(std::sqrt(12.5)));
    CHECK(moment(nu, 1.0) == doctest::Approx(2.5));
    CHECK(mean(nu) == std::vector<double>{1.5, 2.0});
    CHECK_THROWS_AS(EmpiricalMeasure({1.0, 2.0, 3.0}, 2), UsageError);
  }

  TEST_CASE("integrate averages a kernel") {
    const EmpiricalMeasure mu({1.0, 2.0, 3.0});
    const auto r = integrate([](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; }, mu, 1);
    CHECK(r[0] == doctest::Approx(14.0 / 3.0));
  }

  TEST_CASE("one-dimensional examples") {
    const EmpiricalMeasure a({0.0, 1.0}), b({1.0, 2.0}), c({2.0, 0.0});
    CHECK(wasserstein_1d(a, b, 1.0) == 1.0);
    CHECK(wasserstein_1d(a, b, 2.0) == 1.0);
    CHECK(wasserstein_1d(a, c, 2.0) == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(wasserstein_1d(a, EmpiricalMeasure({1.0}), 1.0), UsageError);
    CHECK_THROWS_AS(wasserstein_1d(a, b, 0.5), DomainError);
  }

  TEST_CASE("assignment agrees with permutation enumeration") {
    std::uint64_t seed = 1;
    for (std::size_t n = 1; n <= 6; ++n)
      for (std::size_t d = 1; d <= 3; ++d)
        for (double p : {1.0, 2.0}) {
          const auto x = cloud(seed++, n, d), y = cloud(seed++, n, d);
          const double expected = oracle::wasserstein_bruteforce(x, y, d, p);
          CHECK(std::abs(wasserstein_assignment(MeasureView(x, d), MeasureView(y, d), p) - expected) < 1e-12);
        }
  }

  TEST_CASE("sorted coupling agrees with assignment in 1-D") {
    for (std::size_t n : {1u, 7u, 64u, 200u}) {
      const auto x = cloud(100 + n, n, 1), y = cloud(200 + n, n, 1);
      for (double p : {1.0, 2.0, 3.0})
        CHECK(std::abs(wasserstein_1d(MeasureView(x, 1), MeasureView(y, 1), p) -
                       wasserstein_assignment(MeasureView(x, 1), MeasureView(y, 1), p)) < 1e-12);
    }
  }

  TEST_CASE("metric axioms") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto x = cloud(3 * s, 8, 2), y = cloud(3 * s + 1, 8, 2), z = cloud(3 * s + 2, 8, 2);
      const MeasureView mx(x, 2), my(y, 2), mz(z, 2);
      CHECK(wasserstein_assignment(mx, mx, 2.0) == 0.0);
      CHECK(wasserstein_assignment(mx, my, 2.0) == doctest::Approx(wasserstein_assignment(my, mx, 2.0)));
      CHECK(wasserstein_assignment(mx, mz, 2.0) <=
            wasserstein_assignment(mx, my, 2.0) + wasserstein_assignment(my, mz, 2.0) + 1e-12);
    }
  }

  TEST_CASE("distance to the Dirac cloud is the moment") {
    const auto x = cloud(9, 50, 3);
    const std::vector<double> zero(x.size(), 0.0);
    CHECK(std::abs(wasserstein_assignment(MeasureView(x, 3), MeasureView(zero, 3), 2.0) -
                   moment(MeasureView(x, 3), 2.0)) < 1e-12);
  }

  TEST_CASE("assignment solver") {
    const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
    const Assignment a = solve_assignment(cost, 3);
    CHECK(a.total_cost == 5.0);
    CHECK(a.column_of_row == std::vector<std::size_t>{1, 0, 2});
    const std::vector<double> ties(9, 1.0);
    CHECK(solve_assignment(ties, 3).column_of_row == std::vector<std::size_t>{0, 1, 2});
    CHECK_THROWS_AS(solve_assignment(cost, 2), UsageError);
  }

  TEST_CASE("assignment size guard") {
    const std::vector<double> big((kAssignmentMaxN + 1), 0.0);
    CHECK_THROWS_AS(wasserstein_assignment(MeasureView(big, 1), MeasureView(big, 1), 2.0), UsageError);
  }
}
