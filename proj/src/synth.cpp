#include "cbi/synth.hpp"

#include "cbi/error.hpp"
#include "cbi/io.hpp"
#include "cbi/random.hpp"

#include <cmath>
#include <numeric>

namespace cbi {

namespace {

// Inverse-cdf draw from a probability vector.
std::size_t draw_index(Rng& rng, std::span<const double> probs)
{
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0)
      continue;
    acc += probs[i];
    last = i;
    if (u < acc)
      return i;
  }
  return last;
}

void check_probabilities(std::span<const double> probs, const char* what)
{
  if (probs.empty())
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0))
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " sums to " + format_real(total));
}

} // namespace

void RandomPartitionSpec::validate() const
{
  if (n == 0)
    throw Error(ErrorCode::InvalidArgument, "random partitions need n >= 1");
  check_probabilities(k_distribution, "k distribution");
  for (std::size_t k = n; k < k_distribution.size(); ++k)
    if (k_distribution[k] > 0.0)
      throw Error(ErrorCode::InvalidArgument, "k distribution puts mass above n");
}

std::vector<Partition> random_partitions(const RandomPartitionSpec& spec, std::size_t count)
{
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Partition> out;
  out.reserve(count);
  std::vector<std::int64_t> labels(spec.n);
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t k = draw_index(rng, spec.k_distribution) + 1;
    for (auto& l : labels)
      l = static_cast<std::int64_t>(uniform_below(rng, k));
    out.push_back(Partition::from_labels(labels));
  }
  return out;
}

std::vector<double> cluster_count_distribution(std::span<const Partition> partitions)
{
  std::vector<double> dist;
  for (const auto& p : partitions) {
    if (dist.size() < p.num_clusters())
      dist.resize(p.num_clusters(), 0.0);
    dist[p.num_clusters() - 1] += 1.0;
  }
  for (auto& d : dist)
    d /= static_cast<double>(partitions.size());
  return dist;
}

Partition block_partition(std::size_t n, std::size_t k)
{
  if (n == 0 || k == 0 || k > n)
    throw Error(ErrorCode::InvalidArgument, "block partition needs 1 <= k <= n");
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<std::int64_t>(i * k / n);
  return Partition::from_labels(labels);
}

Partition strided_partition(std::size_t n, std::size_t k)
{
  if (n == 0 || k == 0 || k > n)
    throw Error(ErrorCode::InvalidArgument, "strided partition needs 1 <= k <= n");
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<std::int64_t>(i % k);
  return Partition::from_labels(labels);
}

PerturbedPosterior perturbed_posterior(std::span<const Partition> bases, std::span<const double> weights,
                                       std::size_t flip_count, std::size_t size, std::uint64_t seed,
                                       const SplitSpec& split)
{
  if (bases.empty() || bases.size() != weights.size())
    throw Error(ErrorCode::InvalidArgument, "need one weight per base partition");
  check_probabilities(weights, "base weights");
  const std::size_t n = bases.front().size();
  for (const auto& b : bases)
    if (b.size() != n)
      throw Error(ErrorCode::InvalidArgument, "base partitions differ in size");
  if (flip_count >= n)
    throw Error(ErrorCode::InvalidArgument, "flip count must be smaller than the number of items");

  Rng rng(seed);
  std::vector<Parameter> samples;
  std::vector<std::size_t> origin;
  samples.reserve(size);
  origin.reserve(size);
  std::vector<std::int64_t> labels(n);
  std::vector<std::size_t> items(n);
  for (std::size_t s = 0; s < size; ++s) {
    const std::size_t b = draw_index(rng, weights);
    const Partition& base = bases[b];
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = base[i];
    std::iota(items.begin(), items.end(), std::size_t{ 0 });
    for (std::size_t f = 0; f < flip_count; ++f) {
      const std::size_t j = f + static_cast<std::size_t>(uniform_below(rng, n - f));
      std::swap(items[f], items[j]);
      labels[items[f]] = static_cast<std::int64_t>(uniform_below(rng, base.num_clusters()));
    }
    samples.emplace_back(Partition::from_labels(labels));
    origin.push_back(b);
  }

  SampleSet set = split_samples(std::move(samples), split);
  std::vector<std::size_t> base_of(size);
  const auto order = set.source_order();
  for (std::size_t i = 0; i < size; ++i)
    base_of[i] = origin[order[i]];
  return { std::move(set), std::move(base_of) };
}

} // namespace cbi
