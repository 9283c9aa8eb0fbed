#pragma once

#include "cbi/scoring.hpp"

#include <cstdint>
#include <span>

namespace cbi {

struct ConformalConfig
{
  double alpha = 0.1;

  /// Throws Error(InvalidArgument) unless 0 < alpha < 1.
  void validate() const;
};

/// Outcome of testing one parameter against the calibration scores.
///
/// threshold_rank is k = ceil(alpha (N + 1) - 1) and threshold_score the k-th
/// smallest calibration score. When k < 1 every parameter is in the region:
/// `degenerate` is set and threshold_score is -infinity.
struct ConformalReport
{
  double score = 0.0;
  double p_value = 0.0;
  std::int64_t threshold_rank = 0;
  double threshold_score = 0.0;
  bool in_region = false;
  std::size_t calibration_size = 0;
  bool degenerate = false;
};

/// Credible-ball verdict. `equivalent` is the same test phrased as a
/// conformal report under the score -D(., center).
struct BallReport
{
  double distance = 0.0;
  double radius = 0.0;          // +infinity when unbounded
  std::size_t radius_rank = 0;  // rank of the radius among calibration distances; 0 when unbounded
  bool unbounded = false;
  bool in_region = false;
  ConformalReport equivalent;
};

struct ConcentrationCertificate
{
  double alpha = 0.0;
  std::size_t n = 0;
  double delta = 0.0;
  std::int64_t threshold_rank = 0;
  double term_rank = 0.0;
  double term_jump = 0.0;
  double term_dkw = 0.0;
  double total_bound = 0.0;
  bool degenerate = false;
};

/// ceil(alpha (N + 1) - 1), with arguments within 1e-9 of an integer snapped
/// to it so that e.g. alpha = 0.1, N = 999 gives exactly 99.
std::int64_t threshold_rank(double alpha, std::size_t n);

/// (#{calibration scores <= new_score} + 1) / (N + 1). Ties count toward the
/// numerator.
double conformal_p_value(double new_score, const ScoreTable& table);

/// Region test for an already-computed conformity score.
ConformalReport evaluate_score(double theta_score, const ScoreTable& table, const ConformalConfig& config);

/// Scores `theta` against the training set with the table's policy and tests
/// it against all calibration scores.
ConformalReport region_membership(const Parameter& theta, const SampleSet& samples, const ScoreTable& table,
                                  const ConformalConfig& config, const MetricSpec& spec, std::size_t query_index = 0);

/// Region conditional on `filter`: only calibration samples passing the
/// filter enter the p-value and thresholds. Throws Error(FilterViolation) if
/// theta fails the filter, Error(NoCandidate) if no calibration sample passes.
ConformalReport conditional_region(const Parameter& theta, const SampleSet& samples, const ScoreTable& table,
                                   const ConformalConfig& config, const MetricSpec& spec,
                                   const ParameterFilter& filter, std::size_t query_index = 0);

/// Ball test from precomputed distances to the center.
///
/// The radius is the (N + 1 - k)-th smallest calibration distance with
/// k = threshold_rank(alpha, N). That equals ceil((N + 1)(1 - alpha)) whenever
/// alpha (N + 1) is not an integer; at integer values it is one rank wider, which
/// keeps the ball identical to the p-value region under -D(., center). When
/// k < 1 the ball is all of the space.
BallReport ball_region(double theta_distance, std::span<const double> calibration_distances,
                       const ConformalConfig& config);

/// Ball around `center` (which must be computed from training data only).
BallReport ball_region(const Parameter& theta, const Parameter& center, const SampleSet& samples,
                       const ConformalConfig& config, const MetricSpec& spec);

/// Three-term bound on |Pi(C) - (1 - alpha)| holding with probability
/// >= 1 - delta. The jump term is |k/N - F(s_(k)-)| with F the empirical cdf of
/// the calibration scores; it is 1/N when the scores are distinct and 0 in the
/// degenerate case k < 1 (region is everything). Throws Error(InvalidArgument)
/// unless 0 < delta < 1.
ConcentrationCertificate concentration_certificate(const ScoreTable& table, const ConformalConfig& config,
                                                   double delta);

} // namespace cbi
