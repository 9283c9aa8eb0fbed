#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace cbi {

// One-dimensional comparison of the KDE conformal set with conformal balls
// centered at the sample mean and at the training-set KDE mode, on a
// two-component Gaussian mixture.

struct Demo1dConfig
{
  std::uint64_t seed = 1;
  double alpha = 0.1;
  double gamma = 2.0;
  std::size_t training_size = 1000;
  std::size_t calibration_size = 1000;
  double left_mean = -3.0;
  double right_mean = 3.0;
  double stddev = 1.0;
  double left_weight = 0.6;
  double grid_min = -10.0;
  double grid_max = 10.0;
  double grid_step = 0.01;
  std::size_t coverage_draws = 20000;
  unsigned threads = 0;
};

struct Demo1dSet
{
  double length = 0.0;          // grid measure of the set
  bool includes_valley = false; // contains the midpoint between the two means
  double coverage = 0.0;        // fraction of fresh mixture draws inside the set
  double center = 0.0;          // balls only
  double radius = 0.0;          // balls only
};

struct Demo1dResult
{
  double valley_midpoint = 0.0;
  Demo1dSet kde;
  Demo1dSet mean_ball;
  Demo1dSet mode_ball;
};

Demo1dResult run_demo_1d(const Demo1dConfig& config);

std::string to_json(const Demo1dResult& result);

} // namespace cbi
