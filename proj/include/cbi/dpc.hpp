#pragma once

#include "cbi/metric.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cbi {

// Density-peak analysis of calibration samples, with the KDE scores standing
// in for density.
//
// "Higher" is the total order (score descending, index ascending): among exact
// score ties the lower index counts as higher. The top element has no higher
// neighbour and gets delta = its largest distance to any other sample.

struct DecisionPoint
{
  std::size_t index = 0;
  double score = 0.0;
  double delta = 0.0;
  std::optional<std::size_t> nearest_higher;
};

struct DeltaResult
{
  std::vector<DecisionPoint> points;
  std::size_t top = 0;      // global score argmax (lowest index among ties)
  bool degenerate = false;  // single sample: delta = 0
};

/// Throws Error(DimensionMismatch) if scores and distances disagree in size.
DeltaResult compute_deltas(std::span<const double> scores, const DistanceMatrix& distances, unsigned threads = 0);

struct ModePolicy
{
  enum class Kind
  {
    top_m,
    auto_gap
  };
  Kind kind = Kind::auto_gap;
  std::size_t m = 1;

  static ModePolicy top(std::size_t m) { return { Kind::top_m, m }; }
  static ModePolicy automatic() { return { Kind::auto_gap, 0 }; }
};

/// Parses "auto" or "top:<m>". Throws Error(InvalidArgument).
ModePolicy parse_mode_policy(std::string_view text);

/// Product s_i * delta_i after min-max normalizing each to [0, 1] (a constant
/// column normalizes to 1).
std::vector<double> decision_products(std::span<const DecisionPoint> points);

/// Mode indices, ordered by (score descending, index ascending). The global
/// score argmax is always included. auto_gap keeps the candidates above the
/// largest relative drop (g_i - g_{i+1}) / g_i among the top ceil(sqrt(N))
/// products; no drop at all means a single mode.
/// Throws Error(InvalidModeCount) if m is 0 or exceeds N.
std::vector<std::size_t> detect_modes(std::span<const DecisionPoint> points, const ModePolicy& policy);

struct AssignmentOptions
{
  bool chained = false;          // follow nearest_higher links instead of nearest mode
  double delta_quantile = 0.9;   // outlier: delta above this quantile of deltas ...
  double score_quantile = 0.5;   // ... and score below this quantile of scores
};

struct Assignment
{
  std::vector<std::size_t> assignments; // calibration index of the assigned mode
  std::vector<double> weights;          // aligned with the modes argument
  std::vector<bool> outliers;
};

/// Assigns every sample to its D-nearest mode (ties: lowest mode index), or
/// along the nearest-higher chain when options.chained. Weights are cluster
/// fractions over all N samples, outliers included.
/// Throws Error(InvalidArgument) if modes is empty.
Assignment assign_clusters(std::span<const DecisionPoint> points, std::span<const std::size_t> modes,
                           const DistanceMatrix& distances, const AssignmentOptions& options = {});

struct DecisionGraph
{
  std::vector<DecisionPoint> points;
  std::vector<std::size_t> modes;
  std::vector<std::optional<std::size_t>> assignments;
  std::vector<double> weights;
  std::vector<bool> outliers;
  bool degenerate = false;
};

/// compute_deltas + detect_modes + assign_clusters.
DecisionGraph build_decision_graph(std::span<const double> scores, const DistanceMatrix& distances,
                                   const ModePolicy& policy, const AssignmentOptions& options = {},
                                   unsigned threads = 0);

/// One exported row: index, score, delta, k_clusters, is_mode, assignment, is_outlier.
struct DecisionRecord
{
  std::size_t index = 0;
  double score = 0.0;
  double delta = 0.0;
  std::optional<std::size_t> k_clusters;
  bool is_mode = false;
  std::optional<std::size_t> assignment;
  bool is_outlier = false;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

/// `k_clusters` may be empty (non-partition parameters) or hold one entry per point.
std::vector<DecisionRecord> decision_records(const DecisionGraph& graph, std::span<const std::size_t> k_clusters = {});

void write_decision_csv(std::ostream& out, std::span<const DecisionRecord> records);
void write_decision_jsonl(std::ostream& out, std::span<const DecisionRecord> records);
/// Throws FormatError with the offending line.
std::vector<DecisionRecord> read_decision_csv(std::istream& in);
std::vector<DecisionRecord> read_decision_jsonl(std::istream& in);

} // namespace cbi
