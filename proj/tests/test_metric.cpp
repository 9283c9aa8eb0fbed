#include "oracles.hpp"

#include "cbi/error.hpp"
#include "cbi/metric.hpp"

#include <doctest.h>

#include <functional>

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

std::vector<Parameter> random_partitions(std::mt19937_64& rng, std::size_t count, std::size_t n)
{
  std::vector<Parameter> out;
  for (std::size_t i = 0; i < count; ++i)
    out.emplace_back(Partition::from_labels(oracle::random_labels(rng, n, 5)));
  return out;
}

} // namespace

TEST_SUITE("metric")
{
  TEST_CASE("distance examples")
  {
    CHECK(distance(MetricSpec::euclidean(), RealVector{ 0, 0 }, RealVector{ 3, 4 }) == 5.0);
    CHECK(distance(MetricSpec::vi(), Partition::from_labels({ 0, 1 }), Partition::from_labels({ 0, 0 })) == 1.0);

    std::vector<double> e(36, 0.0);
    e[2 * 6 + 5] = e[5 * 6 + 2] = 0.7;
    auto m = std::make_shared<const DistanceMatrix>(DistanceMatrix::validated(6, e));
    CHECK(distance(MetricSpec::precomputed(m), SampleIndex{ 2 }, SampleIndex{ 5 }) == 0.7);
  }

  TEST_CASE("inadmissible representations and indices")
  {
    const auto p = Partition::from_labels({ 0, 1 });
    CHECK(code_of([&] { (void)distance(MetricSpec::vi(), p, RealVector{ 1.0, 2.0 }); }) == ErrorCode::MetricMismatch);
    CHECK(code_of([&] { (void)distance(MetricSpec::euclidean(), p, p); }) == ErrorCode::MetricMismatch);
    CHECK(code_of([&] { (void)distance(MetricSpec::euclidean(), RealVector{ 1 }, RealVector{ 1, 2 }); }) ==
          ErrorCode::DimensionMismatch);
    auto m = std::make_shared<const DistanceMatrix>(DistanceMatrix::validated(2, { 0, 1, 1, 0 }));
    CHECK(code_of([&] { (void)distance(MetricSpec::precomputed(m), SampleIndex{ 0 }, SampleIndex{ 2 }); }) ==
          ErrorCode::IndexError);
    CHECK(code_of([&] { (void)distance(MetricSpec::precomputed(m), p, SampleIndex{ 0 }); }) ==
          ErrorCode::MetricMismatch);
    CHECK(code_of([&] { (void)m->at(0, 5); }) == ErrorCode::IndexError);
  }

  TEST_CASE("metric names round-trip")
  {
    for (auto k : { MetricKind::vi_partition, MetricKind::euclidean_vector, MetricKind::precomputed })
      CHECK(parse_metric_kind(metric_name(k)) == k);
    CHECK(code_of([] { (void)parse_metric_kind("binder"); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("precomputed matrices are validated")
  {
    CHECK(code_of([] { (void)DistanceMatrix::validated(2, { 0, 1, 1.1, 0 }); }) == ErrorCode::ValidationError);
    CHECK(code_of([] { (void)DistanceMatrix::validated(2, { 0.5, 1, 1, 0 }); }) == ErrorCode::ValidationError);
    CHECK(code_of([] { (void)DistanceMatrix::validated(2, { 0, -1, -1, 0 }); }) == ErrorCode::ValidationError);
    CHECK(code_of([] { (void)DistanceMatrix::validated(2, { 0, 1, 1 }); }) == ErrorCode::ValidationError);
    // Asymmetry below the tolerance is accepted.
    CHECK_NOTHROW((void)DistanceMatrix::validated(2, { 0, 1, 1 + 1e-13, 0 }));
  }

  TEST_CASE("pairwise distances small cases")
  {
    const auto one = pairwise_distances(MetricSpec::vi(), std::vector<Parameter>{ Partition::from_labels({ 0, 1 }) });
    CHECK(one.size() == 1);
    CHECK(one(0, 0) == 0.0);

    const std::vector<Parameter> same(3, Partition::from_labels({ 0, 1, 1 }));
    const auto zero = pairwise_distances(MetricSpec::vi(), same);
    for (double x : zero.entries())
      CHECK(x == 0.0);
  }

  TEST_CASE("pairwise distances match the sequential oracle")
  {
    std::mt19937_64 rng(17);
    for (std::size_t count = 1; count <= 20; ++count) {
      const auto items = random_partitions(rng, count, 10);
      const auto m = pairwise_distances(MetricSpec::vi(), items, 3);
      const auto ref = oracle::pairwise(MetricSpec::vi(), items);
      REQUIRE(m.size() == count);
      for (std::size_t i = 0; i < count * count; ++i)
        CHECK(m.entries()[i] == ref[i]);
    }
    std::vector<Parameter> vecs;
    std::normal_distribution<double> z;
    for (int i = 0; i < 12; ++i)
      vecs.emplace_back(RealVector{ z(rng), z(rng), z(rng) });
    const auto m = pairwise_distances(MetricSpec::euclidean(), vecs, 2);
    const auto ref = oracle::pairwise(MetricSpec::euclidean(), vecs);
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(m.entries()[i] == ref[i]);
  }

  TEST_CASE("pairwise distances do not depend on thread count")
  {
    std::mt19937_64 rng(23);
    const auto items = random_partitions(rng, 57, 30);
    const auto base = pairwise_distances(MetricSpec::vi(), items, 1);
    for (unsigned t : { 2u, 3u, 8u, 0u })
      CHECK(pairwise_distances(MetricSpec::vi(), items, t) == base);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(base(i, i) == 0.0);
      for (std::size_t j = 0; j < base.size(); ++j)
        CHECK(base(i, j) == base(j, i));
    }
  }

  TEST_CASE("submatrix keeps the requested order")
  {
    const auto m = DistanceMatrix::validated(3, { 0, 1, 2, 1, 0, 3, 2, 3, 0 });
    const std::vector<std::size_t> idx{ 2, 0 };
    const auto s = m.submatrix(idx);
    CHECK(s.size() == 2);
    CHECK(s(0, 1) == 2.0);
    CHECK(s(1, 0) == 2.0);
  }
}
