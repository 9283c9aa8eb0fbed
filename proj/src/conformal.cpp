#include "cbi/conformal.hpp"

#include "cbi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cbi {

namespace {

std::int64_t snapped_ceil(double x)
{
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)))
    return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

std::size_t count_at_most(std::span<const double> sorted, double value)
{
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

} // namespace

void ConformalConfig::validate() const
{
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1), got " + std::to_string(alpha));
}

std::int64_t threshold_rank(double alpha, std::size_t n)
{
  return snapped_ceil(alpha * static_cast<double>(n + 1) - 1.0);
}

double conformal_p_value(double new_score, const ScoreTable& table)
{
  const std::size_t count = count_at_most(table.sorted(), new_score);
  return static_cast<double>(count + 1) / static_cast<double>(table.size() + 1);
}

ConformalReport evaluate_score(double theta_score, const ScoreTable& table, const ConformalConfig& config)
{
  config.validate();
  ConformalReport r;
  r.score = theta_score;
  r.calibration_size = table.size();
  const std::size_t count = count_at_most(table.sorted(), theta_score);
  r.p_value = static_cast<double>(count + 1) / static_cast<double>(table.size() + 1);
  r.threshold_rank = threshold_rank(config.alpha, table.size());
  // p >= alpha  <=>  count >= k; the integer form avoids rounding at p == alpha.
  r.in_region = static_cast<std::int64_t>(count) >= r.threshold_rank;
  if (r.threshold_rank < 1) {
    r.degenerate = true;
    r.threshold_score = -std::numeric_limits<double>::infinity();
  } else {
    r.threshold_score = table.sorted()[static_cast<std::size_t>(r.threshold_rank - 1)];
  }
  return r;
}

ConformalReport region_membership(const Parameter& theta, const SampleSet& samples, const ScoreTable& table,
                                  const ConformalConfig& config, const MetricSpec& spec, std::size_t query_index)
{
  config.validate();
  const double s = score_query(theta, samples, table, spec, query_index);
  return evaluate_score(s, table, config);
}

ConformalReport conditional_region(const Parameter& theta, const SampleSet& samples, const ScoreTable& table,
                                   const ConformalConfig& config, const MetricSpec& spec,
                                   const ParameterFilter& filter, std::size_t query_index)
{
  config.validate();
  if (!filter)
    return region_membership(theta, samples, table, config, spec, query_index);
  if (!filter(theta))
    throw Error(ErrorCode::FilterViolation, "tested parameter does not satisfy the conditioning filter");
  if (table.size() != samples.calibration_size())
    throw Error(ErrorCode::DimensionMismatch, "score table does not match the calibration set");

  std::vector<std::size_t> kept;
  const auto calib = samples.calibration();
  for (std::size_t i = 0; i < calib.size(); ++i)
    if (filter(calib[i]))
      kept.push_back(i);
  if (kept.empty())
    throw Error(ErrorCode::NoCandidate, "no calibration sample passes the filter");

  const ScoreTable sub = table.restricted(kept);
  const double s = score_query(theta, samples, table, spec, query_index);
  return evaluate_score(s, sub, config);
}

BallReport ball_region(double theta_distance, std::span<const double> calibration_distances,
                       const ConformalConfig& config)
{
  config.validate();
  const std::size_t n = calibration_distances.size();
  if (n == 0)
    throw Error(ErrorCode::InvalidArgument, "ball region needs at least one calibration distance");

  std::vector<double> sorted(calibration_distances.begin(), calibration_distances.end());
  std::sort(sorted.begin(), sorted.end());

  BallReport b;
  b.distance = theta_distance;
  const std::int64_t k = threshold_rank(config.alpha, n);
  if (k < 1) {
    b.unbounded = true;
    b.radius = std::numeric_limits<double>::infinity();
    b.radius_rank = 0;
    b.in_region = true;
  } else {
    b.radius_rank = n + 1 - static_cast<std::size_t>(k);
    b.radius = sorted[b.radius_rank - 1];
    b.in_region = theta_distance <= b.radius;
  }

  // Same test phrased with the score -D: #{calibration scores <= -d} counts
  // calibration distances >= d.
  ConformalReport& e = b.equivalent;
  e.score = -theta_distance;
  e.calibration_size = n;
  const auto not_closer =
    static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), theta_distance));
  e.p_value = static_cast<double>(not_closer + 1) / static_cast<double>(n + 1);
  e.in_region = b.in_region;
  e.threshold_rank = k;
  e.degenerate = b.unbounded;
  e.threshold_score = -b.radius;
  return b;
}

BallReport ball_region(const Parameter& theta, const Parameter& center, const SampleSet& samples,
                       const ConformalConfig& config, const MetricSpec& spec)
{
  const auto calib = samples.calibration();
  std::vector<double> dists(calib.size());
  for (std::size_t i = 0; i < calib.size(); ++i)
    dists[i] = distance(spec, calib[i], center);
  return ball_region(distance(spec, theta, center), dists, config);
}

ConcentrationCertificate concentration_certificate(const ScoreTable& table, const ConformalConfig& config,
                                                   double delta)
{
  config.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1), got " + std::to_string(delta));

  ConcentrationCertificate c;
  const std::size_t n = table.size();
  const double nd = static_cast<double>(n);
  c.alpha = config.alpha;
  c.n = n;
  c.delta = delta;
  c.threshold_rank = threshold_rank(config.alpha, n);
  c.term_rank = std::max(config.alpha, 1.0 - config.alpha) / nd;
  c.term_dkw = std::sqrt(std::log(2.0 / delta) / (2.0 * nd));
  if (c.threshold_rank < 1) {
    c.degenerate = true;
    c.term_jump = 0.0;
  } else {
    const auto sorted = table.sorted();
    const double sk = sorted[static_cast<std::size_t>(c.threshold_rank - 1)];
    const auto strictly_below =
      static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), sk) - sorted.begin());
    c.term_jump = std::abs(static_cast<double>(c.threshold_rank) / nd - static_cast<double>(strictly_below) / nd);
  }
  c.total_bound = c.term_rank + c.term_jump + c.term_dkw;
  return c;
}

} // namespace cbi
