#include "oracles.hpp"

#include "cbi/error.hpp"
#include "cbi/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace cbi;

TEST_SUITE("synth")
{
  TEST_CASE("point mass at one cluster")
  {
    const auto parts = random_partitions({ 7, { 1.0 }, 3 }, 50);
    for (const auto& p : parts)
      CHECK(p == Partition::from_labels({ 0, 0, 0, 0, 0, 0, 0 }));
  }

  TEST_CASE("all-distinct frequency for n = 3, K = 3")
  {
    const std::size_t draws = 100000;
    const auto parts = random_partitions({ 3, { 0.0, 0.0, 1.0 }, 11 }, draws);
    std::size_t distinct = 0;
    for (const auto& p : parts)
      distinct += p.num_clusters() == 3 ? 1 : 0;
    const double p = 2.0 / 9.0;
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(draws));
    CHECK(std::abs(static_cast<double>(distinct) / static_cast<double>(draws) - p) <= 3 * se);
  }

  TEST_CASE("seeded generation is reproducible and canonical")
  {
    const RandomPartitionSpec spec{ 20, { 0.2, 0.3, 0.5 }, 99 };
    const auto a = random_partitions(spec, 200);
    const auto b = random_partitions(spec, 200);
    CHECK(a == b);
    for (const auto& p : a) {
      const auto l = oracle::labels_of(p);
      CHECK(l == oracle::first_appearance(l));
      CHECK(p.num_clusters() <= 3);
    }
    const auto dist = cluster_count_distribution(a);
    CHECK(dist.size() <= 3);
    double total = 0.0;
    for (double d : dist)
      total += d;
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("spec validation")
  {
    CHECK_THROWS_AS(random_partitions({ 0, { 1.0 }, 0 }, 1), Error);
    CHECK_THROWS_AS(random_partitions({ 3, { 0.5, 0.4 }, 0 }, 1), Error);
    CHECK_THROWS_AS(random_partitions({ 2, { 0.0, 0.0, 1.0 }, 0 }, 1), Error);
  }

  TEST_CASE("base partitions")
  {
    // 96 = 4 * 4 * 6, so every block meets every residue class equally.
    const auto a = block_partition(96, 4);
    const auto b = strided_partition(96, 4);
    CHECK(a.num_clusters() == 4);
    CHECK(b.num_clusters() == 4);
    CHECK(vi_distance(a, b) == doctest::Approx(4.0).epsilon(1e-12));
    const auto c = block_partition(100, 4);
    const auto d = strided_partition(100, 4);
    CHECK(vi_distance(c, d) == doctest::Approx(oracle::vi(c, d)).epsilon(1e-12));
    CHECK(vi_distance(c, d) < 4.0);
  }

  TEST_CASE("no flips reproduces the bases with the stated frequencies")
  {
    const std::vector<Partition> bases{ block_partition(12, 3), strided_partition(12, 3) };
    const std::vector<double> w{ 0.7, 0.3 };
    const std::size_t size = 20000;
    const auto post = perturbed_posterior(bases, w, 0, size, 5, SplitSpec::prefix(size / 2));
    std::size_t first = 0;
    for (std::size_t i = 0; i < size; ++i) {
      const auto& p = std::get<Partition>(post.samples.all()[i]);
      CHECK(p == bases[post.base_of[i]]);
      first += post.base_of[i] == 0 ? 1 : 0;
    }
    const double se = std::sqrt(0.7 * 0.3 / static_cast<double>(size));
    CHECK(std::abs(static_cast<double>(first) / static_cast<double>(size) - 0.7) <= 3 * se);
  }

  TEST_CASE("flips stay within the base clusters and move at most flip_count items")
  {
    const std::vector<Partition> bases{ block_partition(30, 3) };
    const std::vector<double> w{ 1.0 };
    const auto post = perturbed_posterior(bases, w, 4, 500, 8, SplitSpec::shuffled(0.5, 2));
    for (const auto& param : post.samples.all()) {
      const auto& p = std::get<Partition>(param);
      CHECK(p.num_clusters() <= 3);
      const auto l = oracle::labels_of(p);
      CHECK(l == oracle::first_appearance(l));
      std::size_t changed = 0;
      const auto c = contingency(bases[0], p);
      // Items off the diagonal of the best matching; 3 clusters of 10, so a
      // block keeps at least 6 of its items and the majority label identifies it.
      for (std::size_t j = 0; j < c.rows; ++j) {
        std::uint32_t best = 0;
        for (std::size_t k = 0; k < c.cols; ++k)
          best = std::max(best, c.at(j, k));
        changed += c.row_sums[j] - best;
      }
      CHECK(changed <= 4);
    }
    CHECK(post.samples.split().kind == SplitSpec::Kind::fraction);
  }

  TEST_CASE("fixture arguments")
  {
    const std::vector<Partition> bases{ block_partition(10, 2) };
    const std::vector<double> two{ 0.5, 0.5 };
    const std::vector<double> one{ 1.0 };
    CHECK_THROWS_AS(perturbed_posterior(bases, two, 1, 10, 0, SplitSpec::prefix(5)), Error);
    CHECK_THROWS_AS(perturbed_posterior(bases, one, 10, 10, 0, SplitSpec::prefix(5)), Error);
    const std::vector<Partition> mixed{ block_partition(10, 2), block_partition(9, 2) };
    CHECK_THROWS_AS(perturbed_posterior(mixed, two, 1, 10, 0, SplitSpec::prefix(5)), Error);
  }
}
