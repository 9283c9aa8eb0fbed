#pragma once

#include "cbi/metric.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cbi {

/// How a flat sample sequence was divided into training and calibration parts.
struct SplitSpec
{
  enum class Kind
  {
    first_s, // prefix split, keeps chain order
    fraction // seeded shuffle, then the first round(fraction * T) are training
  };

  Kind kind = Kind::first_s;
  std::size_t first_s = 0;
  double fraction = 0.5;
  std::uint64_t seed = 0;

  static SplitSpec prefix(std::size_t s) { return { Kind::first_s, s, 0.0, 0 }; }
  static SplitSpec shuffled(double f, std::uint64_t seed) { return { Kind::fraction, 0, f, seed }; }
};

/// Monte Carlo samples split into a training prefix (size S) and a
/// calibration suffix (size N = T - S). 1 <= S < T.
class SampleSet
{
public:
  /// Throws Error(InvalidSplit) unless 1 <= split_index < parameters.size().
  SampleSet(std::vector<Parameter> parameters, std::size_t split_index, SplitSpec split = {},
            std::vector<std::size_t> source_order = {});

  std::size_t total() const noexcept { return parameters_.size(); }
  std::size_t training_size() const noexcept { return split_index_; }
  std::size_t calibration_size() const noexcept { return parameters_.size() - split_index_; }

  std::span<const Parameter> all() const noexcept { return parameters_; }
  std::span<const Parameter> training() const noexcept { return { parameters_.data(), split_index_ }; }
  std::span<const Parameter> calibration() const noexcept
  {
    return { parameters_.data() + split_index_, calibration_size() };
  }
  const Parameter& calibration_at(std::size_t i) const { return parameters_.at(split_index_ + i); }

  const SplitSpec& split() const noexcept { return split_; }
  /// source_order()[i] is the row of the input sequence that became sample i.
  std::span<const std::size_t> source_order() const noexcept { return source_order_; }

private:
  std::vector<Parameter> parameters_;
  std::size_t split_index_;
  SplitSpec split_;
  std::vector<std::size_t> source_order_;
};

struct ScoringOptions
{
  double gamma = 0.5;
  std::optional<std::size_t> subsample_size;
  std::uint64_t seed = 0;
  unsigned threads = 0; // 0 = all cores
};

/// Calibration scores plus the settings that produced them. Keeps a sorted
/// copy of the scores for order statistics.
class ScoreTable
{
public:
  ScoreTable(std::vector<double> scores, double gamma, std::optional<std::size_t> subsample_size = std::nullopt,
             std::uint64_t seed = 0);

  std::size_t size() const noexcept { return scores_.size(); }
  std::span<const double> scores() const noexcept { return scores_; }
  double operator[](std::size_t i) const noexcept { return scores_[i]; }
  std::span<const double> sorted() const noexcept { return sorted_; }

  double gamma() const noexcept { return gamma_; }
  const std::optional<std::size_t>& subsample_size() const noexcept { return subsample_size_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Table over a subset of calibration indices with the same settings.
  ScoreTable restricted(std::span<const std::size_t> indices) const;

private:
  std::vector<double> scores_;
  std::vector<double> sorted_;
  double gamma_;
  std::optional<std::size_t> subsample_size_;
  std::uint64_t seed_;
};

/// exp(-gamma * d). Throws Error(InvalidBandwidth) for gamma <= 0.
double kernel(double gamma, double d);

/// Mean kernel value between `theta` and every training parameter, summed in
/// ascending training order with compensated accumulation.
/// Throws Error(EmptyTrainingSet) when `train` is empty.
double score(const Parameter& theta, std::span<const Parameter> train, const MetricSpec& spec, double gamma);

/// Same, restricted to a uniform subset of `subsample_size` training
/// indices drawn without replacement from the RNG stream `stream`.
double score_subsampled(const Parameter& theta, std::span<const Parameter> train, const MetricSpec& spec, double gamma,
                        std::size_t subsample_size, std::uint64_t stream);

/// Stream used for calibration sample `i` under master seed `seed`.
std::uint64_t calibration_stream(std::uint64_t seed, std::size_t i) noexcept;
/// Stream used for the `i`-th externally supplied query under `seed`.
std::uint64_t query_stream(std::uint64_t seed, std::size_t i) noexcept;

/// Scores every calibration sample against the training set, in parallel
/// over calibration indices. Output is independent of options.threads.
/// Throws Error(InvalidSubsample) if subsample_size is 0 or exceeds S.
ScoreTable score_calibration(const SampleSet& samples, const MetricSpec& spec, const ScoringOptions& options);

/// Scores a new parameter with the same gamma/subsampling policy as `table`.
double score_query(const Parameter& theta, const SampleSet& samples, const ScoreTable& table, const MetricSpec& spec,
                   std::size_t query_index = 0);

using ParameterFilter = std::function<bool(const Parameter&)>;

/// Declarative filter on partition statistics. Non-partition parameters are
/// rejected with Error(MetricMismatch).
struct ClusterCountFilter
{
  std::optional<std::size_t> min_clusters;
  std::optional<std::size_t> max_clusters;

  bool operator()(const Parameter& p) const;
};

struct PointEstimate
{
  std::size_t calibration_index = 0; // position within the calibration set
  std::size_t sample_index = 0;      // position within SampleSet::all()
  double score = 0.0;
  Parameter parameter;
};

/// Highest-scoring calibration sample among those passing `filter`; ties go
/// to the lowest calibration index. Throws Error(NoCandidate) if none pass.
PointEstimate point_estimate(const SampleSet& samples, const ScoreTable& table, const ParameterFilter& filter = {});

} // namespace cbi
