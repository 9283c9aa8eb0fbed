#include "cbi/error.hpp"
#include "cbi/thinning.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <optional>
#include <random>

using namespace cbi;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

} // namespace

TEST_SUITE("thinning")
{
  TEST_CASE("tv bound examples")
  {
    CHECK(tv_bound(GeometricMixing{ 3.0, 0.9 }, 1, 1) == 0.0);
    CHECK(tv_bound(TabulatedMixing{ { 0.5, 0.25 } }, 1, 2) == 0.0);
    CHECK(tv_bound(GeometricMixing{ 1.0, 0.5 }, 101, 10) == doctest::Approx(100.0 / 1024.0).epsilon(1e-15));
    CHECK(tv_bound(TabulatedMixing{ { 0.5, 0.25, 0.1 } }, 3, 2) == 0.5);
    CHECK(code_of([] { (void)tv_bound(TabulatedMixing{ { 0.5, 0.25, 0.1 } }, 3, 4); }) == ErrorCode::OutOfRange);
    CHECK(code_of([] { (void)tv_bound(GeometricMixing{ 1.0, 0.5 }, 3, 0); }) == ErrorCode::OutOfRange);
  }

  TEST_CASE("model validation")
  {
    CHECK(code_of([] { validate(GeometricMixing{ 0.0, 0.5 }); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(GeometricMixing{ 1.0, 1.0 }); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(TabulatedMixing{ { 0.5, 0.5 } }); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(TabulatedMixing{ { 0.5, -0.1 } }); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(TabulatedMixing{}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("min thinning examples")
  {
    CHECK(min_thinning(GeometricMixing{ 1.0, 0.5 }, 2, 0.25) == 2);
    CHECK(min_thinning(GeometricMixing{ 1.0, 0.5 }, 11, 5.0) == 1);
    CHECK(min_thinning(TabulatedMixing{ { 0.5, 0.25, 0.1 } }, 3, 0.5) == 2);
    CHECK(code_of([] { (void)min_thinning(TabulatedMixing{ { 0.5, 0.25, 0.1 } }, 3, 0.1); }) ==
          ErrorCode::BudgetInfeasible);
    CHECK(code_of([] { (void)min_thinning(GeometricMixing{ 1.0, 0.5 }, 3, 0.0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("tabulated min thinning matches a linear scan")
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.3, 0.95);
    for (int rep = 0; rep < 300; ++rep) {
      TabulatedMixing tab;
      double e = 1.0;
      for (int t = 0; t < 30; ++t) {
        e *= u(rng);
        tab.eps.push_back(e);
      }
      const std::size_t n = 2 + static_cast<std::size_t>(rep % 50);
      const double budget = std::exp(-u(rng) * 12.0);
      std::optional<std::size_t> want;
      for (std::size_t m = 1; m <= tab.eps.size() && !want; ++m)
        if (static_cast<double>(n - 1) * tab.eps[m - 1] <= budget)
          want = m;
      if (want)
        CHECK(min_thinning(tab, n, budget) == *want);
      else
        CHECK(code_of([&] { (void)min_thinning(tab, n, budget); }) == ErrorCode::BudgetInfeasible);
    }
  }

  TEST_CASE("monotonicity")
  {
    const GeometricMixing g{ 2.0, 0.8 };
    for (std::size_t n = 1; n < 30; ++n)
      for (std::size_t m = 1; m < 30; ++m) {
        CHECK(tv_bound(g, n, m + 1) <= tv_bound(g, n, m));
        CHECK(tv_bound(g, n + 1, m) >= tv_bound(g, n, m));
      }
  }

  TEST_CASE("geometric min thinning is the smallest feasible gap")
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
      const GeometricMixing g{ 0.1 + 10.0 * u(rng), 0.05 + 0.94 * u(rng) };
      const std::size_t n = 2 + static_cast<std::size_t>(u(rng) * 5000);
      const double budget = std::exp(-u(rng) * 10.0);
      const auto m = min_thinning(g, n, budget);
      CHECK(tv_bound(g, n, m) <= budget);
      if (m > 1)
        CHECK(tv_bound(g, n, m - 1) > budget);
    }
  }
}
