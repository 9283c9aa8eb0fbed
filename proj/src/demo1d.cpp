#include "cbi/demo1d.hpp"

#include "cbi/conformal.hpp"
#include "cbi/error.hpp"
#include "cbi/parallel.hpp"
#include "cbi/random.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

namespace cbi {

namespace {

double draw_mixture(Rng& rng, const Demo1dConfig& c)
{
  const bool left = uniform01(rng) < c.left_weight;
  return (left ? c.left_mean : c.right_mean) + c.stddev * standard_normal(rng);
}

Parameter point(double x)
{
  return RealVector{ x };
}

} // namespace

Demo1dResult run_demo_1d(const Demo1dConfig& c)
{
  if (!(c.grid_step > 0.0) || !(c.grid_max > c.grid_min))
    throw Error(ErrorCode::InvalidArgument, "demo grid is empty");
  if (!(c.left_weight > 0.0 && c.left_weight < 1.0))
    throw Error(ErrorCode::InvalidArgument, "mixture weight must lie in (0, 1)");
  const ConformalConfig conformal{ c.alpha };
  conformal.validate();

  Rng rng(c.seed);
  std::vector<Parameter> draws;
  const std::size_t total = c.training_size + c.calibration_size;
  draws.reserve(total);
  for (std::size_t i = 0; i < total; ++i)
    draws.push_back(point(draw_mixture(rng, c)));
  const SampleSet samples(std::move(draws), c.training_size, SplitSpec::prefix(c.training_size));
  const MetricSpec metric = MetricSpec::euclidean();
  const ScoreTable table = score_calibration(samples, metric, { c.gamma, std::nullopt, c.seed, c.threads });

  const auto train = samples.training();
  auto coord = [](const Parameter& p) { return std::get<RealVector>(p)[0]; };

  // Ball centers come from the training half only.
  double mean = 0.0;
  for (const auto& p : train)
    mean += coord(p);
  mean /= static_cast<double>(train.size());

  std::vector<double> train_scores(train.size());
  parallel_for(train.size(), c.threads,
               [&](std::size_t i) { train_scores[i] = score(train[i], train, metric, c.gamma); });
  const auto mode_at = static_cast<std::size_t>(
    std::max_element(train_scores.begin(), train_scores.end()) - train_scores.begin());
  const double mode = coord(train[mode_at]);

  auto ball = [&](double center) {
    std::vector<double> d;
    d.reserve(samples.calibration_size());
    for (const auto& p : samples.calibration())
      d.push_back(std::abs(coord(p) - center));
    return ball_region(0.0, d, conformal);
  };
  const BallReport mean_ball = ball(mean);
  const BallReport mode_ball = ball(mode);

  auto in_kde = [&](double x) { return evaluate_score(score(point(x), train, metric, c.gamma), table, conformal).in_region; };

  Demo1dResult r;
  r.valley_midpoint = 0.5 * (c.left_mean + c.right_mean);

  const auto steps = static_cast<std::size_t>(std::floor((c.grid_max - c.grid_min) / c.grid_step)) + 1;
  std::vector<char> kde_grid(steps), mean_grid(steps), mode_grid(steps);
  parallel_for(steps, c.threads, [&](std::size_t i) {
    const double x = c.grid_min + static_cast<double>(i) * c.grid_step;
    kde_grid[i] = in_kde(x);
    mean_grid[i] = std::abs(x - mean) <= mean_ball.radius;
    mode_grid[i] = std::abs(x - mode) <= mode_ball.radius;
  });
  auto measure = [&](const std::vector<char>& g) {
    return static_cast<double>(std::accumulate(g.begin(), g.end(), std::size_t{ 0 })) * c.grid_step;
  };

  std::vector<double> fresh(c.coverage_draws);
  Rng fresh_rng(stream_seed(c.seed, 3, 0));
  for (auto& x : fresh)
    x = draw_mixture(fresh_rng, c);
  std::vector<char> fresh_in(fresh.size());
  parallel_for(fresh.size(), c.threads, [&](std::size_t i) { fresh_in[i] = in_kde(fresh[i]); });
  auto fraction = [&](auto&& inside) {
    if (fresh.empty())
      return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < fresh.size(); ++i)
      hit += inside(i) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(fresh.size());
  };

  r.kde.length = measure(kde_grid);
  r.kde.includes_valley = in_kde(r.valley_midpoint);
  r.kde.coverage = fraction([&](std::size_t i) { return fresh_in[i] != 0; });

  r.mean_ball.center = mean;
  r.mean_ball.radius = mean_ball.radius;
  r.mean_ball.length = measure(mean_grid);
  r.mean_ball.includes_valley = std::abs(r.valley_midpoint - mean) <= mean_ball.radius;
  r.mean_ball.coverage = fraction([&](std::size_t i) { return std::abs(fresh[i] - mean) <= mean_ball.radius; });

  r.mode_ball.center = mode;
  r.mode_ball.radius = mode_ball.radius;
  r.mode_ball.length = measure(mode_grid);
  r.mode_ball.includes_valley = std::abs(r.valley_midpoint - mode) <= mode_ball.radius;
  r.mode_ball.coverage = fraction([&](std::size_t i) { return std::abs(fresh[i] - mode) <= mode_ball.radius; });
  return r;
}

std::string to_json(const Demo1dResult& r)
{
  auto set = [](const Demo1dSet& s, bool ball) {
    nlohmann::ordered_json j;
    j["length"] = s.length;
    j["includes_valley"] = s.includes_valley;
    j["coverage"] = s.coverage;
    if (ball) {
      j["center"] = s.center;
      j["radius"] = std::isfinite(s.radius) ? nlohmann::ordered_json(s.radius) : nlohmann::ordered_json(nullptr);
    }
    return j;
  };
  nlohmann::ordered_json j;
  j["valley_midpoint"] = r.valley_midpoint;
  j["kde"] = set(r.kde, false);
  j["mean_ball"] = set(r.mean_ball, true);
  j["mode_ball"] = set(r.mode_ball, true);
  return j.dump();
}

} // namespace cbi
