#pragma once

#include "cbi/dpc.hpp"
#include "cbi/metric.hpp"
#include "cbi/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cbi {

// Exit codes: 0 on success, Error::exit_code() (10..26) for library errors,
// kUsageExit for malformed command lines and kInternalExit for anything else.
inline constexpr int kUsageExit = 64;
inline constexpr int kInternalExit = 1;

struct RunConfig
{
  MetricKind metric = MetricKind::vi_partition;
  double gamma = 0.5;
  double alpha = 0.1;
  double delta = 0.05;
  std::optional<std::size_t> split_first_s;
  std::optional<double> split_fraction;
  std::optional<std::size_t> subsample;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string mode_policy = "auto";
  AssignmentOptions assignment;
  bool ball = false;
  std::optional<std::size_t> filter_max_k;
  bool header = false;

  std::filesystem::path input;
  std::filesystem::path scores;
  std::filesystem::path candidates;
  std::filesystem::path center;
  std::filesystem::path output;

  /// Training prefix of half the samples when neither split flag is given.
  SplitSpec split_for(std::size_t total) const;
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cbi
