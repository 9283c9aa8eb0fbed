#include "cbi/scoring.hpp"

#include "cbi/error.hpp"
#include "cbi/parallel.hpp"
#include "cbi/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cbi {

SampleSet::SampleSet(std::vector<Parameter> parameters, std::size_t split_index, SplitSpec split,
                     std::vector<std::size_t> source_order)
  : parameters_(std::move(parameters))
  , split_index_(split_index)
  , split_(split)
  , source_order_(std::move(source_order))
{
  if (split_index_ < 1 || split_index_ >= parameters_.size())
    throw Error(ErrorCode::InvalidSplit,
                "training size " + std::to_string(split_index_) + " invalid for " +
                  std::to_string(parameters_.size()) + " samples (need 1 <= S < T)");
  if (source_order_.empty()) {
    source_order_.resize(parameters_.size());
    std::iota(source_order_.begin(), source_order_.end(), std::size_t{ 0 });
  } else if (source_order_.size() != parameters_.size()) {
    throw Error(ErrorCode::InvalidSplit, "source order length does not match sample count");
  }
}

ScoreTable::ScoreTable(std::vector<double> scores, double gamma, std::optional<std::size_t> subsample_size,
                       std::uint64_t seed)
  : scores_(std::move(scores))
  , sorted_(scores_)
  , gamma_(gamma)
  , subsample_size_(subsample_size)
  , seed_(seed)
{
  if (scores_.empty())
    throw Error(ErrorCode::InvalidArgument, "score table is empty");
  std::sort(sorted_.begin(), sorted_.end());
}

ScoreTable ScoreTable::restricted(std::span<const std::size_t> indices) const
{
  std::vector<double> subset;
  subset.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= scores_.size())
      throw Error(ErrorCode::IndexError, "calibration index " + std::to_string(i) + " out of range");
    subset.push_back(scores_[i]);
  }
  if (subset.empty())
    throw Error(ErrorCode::NoCandidate, "no calibration sample passes the filter");
  return ScoreTable(std::move(subset), gamma_, subsample_size_, seed_);
}

double kernel(double gamma, double d)
{
  if (!(gamma > 0.0))
    throw Error(ErrorCode::InvalidBandwidth, "gamma must be positive, got " + std::to_string(gamma));
  return std::exp(-gamma * d);
}

namespace {

// Neumaier's compensated sum.
struct CompensatedSum
{
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept
  {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const noexcept { return sum + carry; }
};

void check_gamma(double gamma)
{
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorCode::InvalidBandwidth, "gamma must be positive and finite, got " + std::to_string(gamma));
}

} // namespace

double score(const Parameter& theta, std::span<const Parameter> train, const MetricSpec& spec, double gamma)
{
  check_gamma(gamma);
  if (train.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "training set is empty");
  CompensatedSum acc;
  for (const auto& t : train)
    acc.add(std::exp(-gamma * distance(spec, theta, t)));
  return acc.value() / static_cast<double>(train.size());
}

double score_subsampled(const Parameter& theta, std::span<const Parameter> train, const MetricSpec& spec, double gamma,
                        std::size_t subsample_size, std::uint64_t stream)
{
  check_gamma(gamma);
  if (train.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "training set is empty");
  if (subsample_size == 0 || subsample_size > train.size())
    throw Error(ErrorCode::InvalidSubsample,
                "subsample size " + std::to_string(subsample_size) + " not in [1, " + std::to_string(train.size()) +
                  "]");
  if (subsample_size == train.size())
    return score(theta, train, spec, gamma);

  // Partial Fisher-Yates; the chosen indices are then visited in ascending
  // order so the summation order matches the full-set path.
  thread_local std::vector<std::size_t> pool;
  pool.resize(train.size());
  std::iota(pool.begin(), pool.end(), std::size_t{ 0 });
  Rng rng(stream);
  for (std::size_t i = 0; i < subsample_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, train.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(subsample_size));

  CompensatedSum acc;
  for (std::size_t i = 0; i < subsample_size; ++i)
    acc.add(std::exp(-gamma * distance(spec, theta, train[pool[i]])));
  return acc.value() / static_cast<double>(subsample_size);
}

std::uint64_t calibration_stream(std::uint64_t seed, std::size_t i) noexcept
{
  return stream_seed(seed, 1, i);
}

std::uint64_t query_stream(std::uint64_t seed, std::size_t i) noexcept
{
  return stream_seed(seed, 2, i);
}

ScoreTable score_calibration(const SampleSet& samples, const MetricSpec& spec, const ScoringOptions& options)
{
  check_gamma(options.gamma);
  const auto train = samples.training();
  const auto calib = samples.calibration();
  if (options.subsample_size && (*options.subsample_size == 0 || *options.subsample_size > train.size()))
    throw Error(ErrorCode::InvalidSubsample,
                "subsample size " + std::to_string(*options.subsample_size) + " not in [1, " +
                  std::to_string(train.size()) + "]");
  for (const auto& p : samples.all())
    check_admissible(spec, p);

  std::vector<double> scores(calib.size());
  parallel_for(calib.size(), options.threads, [&](std::size_t i) {
    if (options.subsample_size)
      scores[i] = score_subsampled(calib[i], train, spec, options.gamma, *options.subsample_size,
                                   calibration_stream(options.seed, i));
    else
      scores[i] = score(calib[i], train, spec, options.gamma);
  });
  return ScoreTable(std::move(scores), options.gamma, options.subsample_size, options.seed);
}

double score_query(const Parameter& theta, const SampleSet& samples, const ScoreTable& table, const MetricSpec& spec,
                   std::size_t query_index)
{
  check_admissible(spec, theta);
  if (table.subsample_size())
    return score_subsampled(theta, samples.training(), spec, table.gamma(), *table.subsample_size(),
                            query_stream(table.seed(), query_index));
  return score(theta, samples.training(), spec, table.gamma());
}

bool ClusterCountFilter::operator()(const Parameter& p) const
{
  const auto* part = std::get_if<Partition>(&p);
  if (!part)
    throw Error(ErrorCode::MetricMismatch, "cluster-count filter applies to partitions only");
  const std::size_t k = part->num_clusters();
  if (min_clusters && k < *min_clusters)
    return false;
  if (max_clusters && k > *max_clusters)
    return false;
  return true;
}

PointEstimate point_estimate(const SampleSet& samples, const ScoreTable& table, const ParameterFilter& filter)
{
  if (table.size() != samples.calibration_size())
    throw Error(ErrorCode::DimensionMismatch,
                "score table has " + std::to_string(table.size()) + " entries for " +
                  std::to_string(samples.calibration_size()) + " calibration samples");
  const auto calib = samples.calibration();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < calib.size(); ++i) {
    if (filter && !filter(calib[i]))
      continue;
    if (!best || table[i] > table[*best])
      best = i;
  }
  if (!best)
    throw Error(ErrorCode::NoCandidate, "no calibration sample passes the filter");
  return { *best, samples.training_size() + *best, table[*best], calib[*best] };
}

} // namespace cbi
