#include "oracles.hpp"

#include "cbi/error.hpp"
#include "cbi/scoring.hpp"

#include <doctest.h>

#include <functional>

#include <algorithm>
#include <cmath>
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

std::vector<Parameter> partitions(std::mt19937_64& rng, std::size_t count, std::size_t n, std::int64_t max_k = 4)
{
  std::vector<Parameter> out;
  for (std::size_t i = 0; i < count; ++i)
    out.emplace_back(Partition::from_labels(oracle::random_labels(rng, n, max_k)));
  return out;
}

std::vector<Parameter> points(std::initializer_list<double> xs)
{
  std::vector<Parameter> out;
  for (double x : xs)
    out.emplace_back(RealVector{ x });
  return out;
}

} // namespace

TEST_SUITE("scoring")
{
  TEST_CASE("kernel")
  {
    CHECK(kernel(0.5, 0.0) == 1.0);
    CHECK(kernel(0.5, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    double prev = 1.0;
    for (double d = 0.5; d < 50.0; d += 0.5) {
      const double k = kernel(1.0, d);
      CHECK(k < prev);
      prev = k;
    }
    CHECK(code_of([] { (void)kernel(0.0, 1.0); }) == ErrorCode::InvalidBandwidth);
    CHECK(code_of([] { (void)kernel(-1.0, 1.0); }) == ErrorCode::InvalidBandwidth);
  }

  TEST_CASE("score examples")
  {
    const auto train = points({ 0.0, 2.0 });
    CHECK(score(RealVector{ 0.0 }, train, MetricSpec::euclidean(), 0.5) ==
          doctest::Approx((1.0 + std::exp(-1.0)) / 2.0).epsilon(1e-15));
    const auto same = points({ 1.5, 1.5, 1.5 });
    CHECK(score(RealVector{ 1.5 }, same, MetricSpec::euclidean(), 0.5) == 1.0);
    CHECK(code_of([] { (void)score(RealVector{ 0.0 }, {}, MetricSpec::euclidean(), 0.5); }) ==
          ErrorCode::EmptyTrainingSet);
  }

  TEST_CASE("scores lie in (0, 1] and match the naive oracle")
  {
    std::mt19937_64 rng(8);
    const auto train = partitions(rng, 40, 12);
    const auto queries = partitions(rng, 40, 12);
    for (const auto& q : queries) {
      const double s = score(q, train, MetricSpec::vi(), 0.5);
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
      CHECK(s == doctest::Approx(oracle::score(q, train, MetricSpec::vi(), 0.5)).epsilon(1e-14));
    }
  }

  TEST_CASE("split validity")
  {
    CHECK(code_of([] { SampleSet(points({ 1, 2 }), 0); }) == ErrorCode::InvalidSplit);
    CHECK(code_of([] { SampleSet(points({ 1, 2 }), 2); }) == ErrorCode::InvalidSplit);
    const SampleSet s(points({ 1, 2, 3 }), 2);
    CHECK(s.training_size() == 2);
    CHECK(s.calibration_size() == 1);
    CHECK(std::get<RealVector>(s.calibration_at(0))[0] == 3.0);
  }

  TEST_CASE("calibration scores equal a sequential loop exactly")
  {
    std::mt19937_64 rng(31);
    auto all = partitions(rng, 8, 4);
    const SampleSet samples(all, 5);
    const auto table = score_calibration(samples, MetricSpec::vi(), { 0.5, std::nullopt, 0, 4 });
    REQUIRE(table.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(table[i] == score(samples.calibration_at(i), samples.training(), MetricSpec::vi(), 0.5));
      CHECK(table[i] ==
            doctest::Approx(oracle::score(samples.calibration_at(i), samples.training(), MetricSpec::vi(), 0.5))
              .epsilon(1e-15));
    }
    CHECK(std::is_sorted(table.sorted().begin(), table.sorted().end()));
  }

  TEST_CASE("identical samples score 1")
  {
    const std::vector<Parameter> all(10, Partition::from_labels({ 0, 1, 1, 0 }));
    const auto table = score_calibration(SampleSet(all, 6), MetricSpec::vi(), {});
    for (double s : table.scores())
      CHECK(s == 1.0);
  }

  TEST_CASE("thread count does not change scores")
  {
    std::mt19937_64 rng(41);
    const SampleSet samples(partitions(rng, 300, 20), 200);
    const auto one = score_calibration(samples, MetricSpec::vi(), { 0.5, std::nullopt, 0, 1 });
    for (unsigned t : { 2u, 5u, 0u }) {
      const auto many = score_calibration(samples, MetricSpec::vi(), { 0.5, std::nullopt, 0, t });
      CHECK(std::equal(one.scores().begin(), one.scores().end(), many.scores().begin(), many.scores().end()));
    }
    const auto sub1 = score_calibration(samples, MetricSpec::vi(), { 0.5, 50, 9, 1 });
    const auto sub4 = score_calibration(samples, MetricSpec::vi(), { 0.5, 50, 9, 4 });
    CHECK(std::equal(sub1.scores().begin(), sub1.scores().end(), sub4.scores().begin(), sub4.scores().end()));
  }

  TEST_CASE("subsampling")
  {
    std::mt19937_64 rng(43);
    const SampleSet samples(partitions(rng, 60, 10), 40);
    const auto full = score_calibration(samples, MetricSpec::vi(), {});
    const auto all_s = score_calibration(samples, MetricSpec::vi(), { 0.5, 40, 3, 0 });
    CHECK(std::equal(full.scores().begin(), full.scores().end(), all_s.scores().begin(), all_s.scores().end()));

    const auto a = score_calibration(samples, MetricSpec::vi(), { 0.5, 10, 3, 0 });
    const auto b = score_calibration(samples, MetricSpec::vi(), { 0.5, 10, 3, 0 });
    const auto c = score_calibration(samples, MetricSpec::vi(), { 0.5, 10, 4, 0 });
    CHECK(std::equal(a.scores().begin(), a.scores().end(), b.scores().begin(), b.scores().end()));
    CHECK_FALSE(std::equal(a.scores().begin(), a.scores().end(), c.scores().begin(), c.scores().end()));
    CHECK(a.subsample_size() == std::optional<std::size_t>(10));

    CHECK(code_of([&] { (void)score_calibration(samples, MetricSpec::vi(), { 0.5, 41, 0, 0 }); }) ==
          ErrorCode::InvalidSubsample);
    CHECK(code_of([&] { (void)score_calibration(samples, MetricSpec::vi(), { 0.5, 0, 0, 0 }); }) ==
          ErrorCode::InvalidSubsample);
  }

  TEST_CASE("subsampled score is the mean over some subset of the stated size")
  {
    const auto train = points({ 0, 1, 2, 3, 4, 5, 6, 7 });
    const RealVector theta{ 0.0 };
    const double s = score_subsampled(theta, train, MetricSpec::euclidean(), 1.0, 3, 77);
    // Enumerate all 3-subsets and look for an exact match of the mean.
    bool found = false;
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j)
        for (int k = j + 1; k < 8; ++k) {
          const double m = (std::exp(-double(i)) + std::exp(-double(j)) + std::exp(-double(k))) / 3.0;
          found = found || std::abs(m - s) < 1e-15;
        }
    CHECK(found);
  }

  TEST_CASE("training order does not matter")
  {
    std::mt19937_64 rng(47);
    auto train = partitions(rng, 100, 15);
    const auto q = partitions(rng, 10, 15);
    std::vector<double> before;
    for (const auto& p : q)
      before.push_back(score(p, train, MetricSpec::vi(), 0.5));
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t i = 0; i < q.size(); ++i)
      CHECK(score(q[i], train, MetricSpec::vi(), 0.5) == doctest::Approx(before[i]).epsilon(1e-15));
  }

  TEST_CASE("distance scaling")
  {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> z;
    std::vector<Parameter> train, scaled_train, calib, scaled_calib;
    for (int i = 0; i < 30; ++i) {
      const double x = z(rng);
      train.emplace_back(RealVector{ x });
      scaled_train.emplace_back(RealVector{ 2.0 * x });
    }
    for (int i = 0; i < 20; ++i) {
      const double x = z(rng);
      calib.emplace_back(RealVector{ x });
      scaled_calib.emplace_back(RealVector{ 2.0 * x });
    }
    std::vector<double> s, s_scaled, s_rescaled;
    for (std::size_t i = 0; i < calib.size(); ++i) {
      s.push_back(score(calib[i], train, MetricSpec::euclidean(), 0.7));
      s_scaled.push_back(score(scaled_calib[i], scaled_train, MetricSpec::euclidean(), 0.7));
      s_rescaled.push_back(score(scaled_calib[i], scaled_train, MetricSpec::euclidean(), 0.35));
      CHECK(s_scaled.back() <= s.back());
    }
    CHECK(std::max_element(s.begin(), s.end()) - s.begin() ==
          std::max_element(s_rescaled.begin(), s_rescaled.end()) - s_rescaled.begin());
  }

  TEST_CASE("point estimate")
  {
    const auto all = points({ 9, 9, 1, 2, 3 });
    const SampleSet samples(all, 2);
    const ScoreTable table({ 0.2, 0.9, 0.9 }, 0.5);
    const auto est = point_estimate(samples, table);
    CHECK(est.calibration_index == 1);
    CHECK(est.sample_index == 3);
    CHECK(est.score == 0.9);

    const SampleSet single(points({ 0, 5 }), 1);
    CHECK(point_estimate(single, ScoreTable({ 0.4 }, 0.5)).calibration_index == 0);

    const ParameterFilter none = [](const Parameter&) { return false; };
    CHECK(code_of([&] { (void)point_estimate(samples, table, none); }) == ErrorCode::NoCandidate);
  }

  TEST_CASE("filtered point estimate is the argmax over passing samples")
  {
    std::mt19937_64 rng(59);
    for (int t = 0; t < 20; ++t) {
      const SampleSet samples(partitions(rng, 80, 8, 5), 40);
      const auto table = score_calibration(samples, MetricSpec::vi(), {});
      const ClusterCountFilter filter{ std::nullopt, 2 };
      std::optional<std::size_t> expect;
      for (std::size_t i = 0; i < table.size(); ++i)
        if (std::get<Partition>(samples.calibration_at(i)).num_clusters() <= 2 &&
            (!expect || table[i] > table[*expect]))
          expect = i;
      if (!expect) {
        CHECK(code_of([&] { (void)point_estimate(samples, table, filter); }) == ErrorCode::NoCandidate);
        continue;
      }
      CHECK(point_estimate(samples, table, filter).calibration_index == *expect);
    }
    CHECK(code_of([] { (void)ClusterCountFilter{ std::nullopt, 2 }(RealVector{ 1.0 }); }) ==
          ErrorCode::MetricMismatch);
  }

  TEST_CASE("restricted tables")
  {
    const ScoreTable t({ 0.5, 0.1, 0.3 }, 0.5);
    const std::vector<std::size_t> keep{ 2, 0 };
    const auto r = t.restricted(keep);
    CHECK(r.size() == 2);
    CHECK(r[0] == 0.3);
    CHECK(r[1] == 0.5);
    CHECK(code_of([&] { (void)t.restricted({}); }) == ErrorCode::NoCandidate);
  }
}
