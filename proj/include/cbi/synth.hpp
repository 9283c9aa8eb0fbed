#pragma once

#include "cbi/partition.hpp"
#include "cbi/scoring.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cbi {

/// Random partitions for credible-set size checks: draw K from
/// k_distribution (entry k - 1 is the probability of K = k), then label each of
/// n items uniformly in {0, ..., K-1}. Empty clusters are not re-drawn, so the
/// realized number of clusters can be smaller than K.
struct RandomPartitionSpec
{
  std::size_t n = 0;
  std::vector<double> k_distribution;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidArgument) unless the distribution sums to 1 (1e-9)
  /// and its support lies in [1, n].
  void validate() const;
};

std::vector<Partition> random_partitions(const RandomPartitionSpec& spec, std::size_t count);

/// Empirical distribution of the number of clusters, indexed by K - 1.
std::vector<double> cluster_count_distribution(std::span<const Partition> partitions);

/// Item i goes to cluster floor(i k / n): k contiguous blocks.
Partition block_partition(std::size_t n, std::size_t k);
/// Item i goes to cluster i mod k. For k dividing n this is independent of
/// block_partition(n, k), so their VI distance is 2 log2 k.
Partition strided_partition(std::size_t n, std::size_t k);

/// Multimodal fixture: every sample picks a base by `weights` and moves
/// `flip_count` distinct random items to random clusters of that base.
struct PerturbedPosterior
{
  SampleSet samples;
  std::vector<std::size_t> base_of; // generating base per sample, in SampleSet order
};

/// Throws Error(InvalidArgument) for mismatched weights, bases of different
/// sizes, or flip_count >= n.
PerturbedPosterior perturbed_posterior(std::span<const Partition> bases, std::span<const double> weights,
                                       std::size_t flip_count, std::size_t size, std::uint64_t seed,
                                       const SplitSpec& split);

} // namespace cbi
