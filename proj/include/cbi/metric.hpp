#pragma once

#include "cbi/partition.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace cbi {

using RealVector = std::vector<double>;

// Opaque parameter identified only by its row in a precomputed matrix.
struct SampleIndex
{
  std::size_t value = 0;
  friend bool operator==(SampleIndex, SampleIndex) = default;
};

using Parameter = std::variant<Partition, RealVector, SampleIndex>;

/// Dense symmetric matrix of pairwise discrepancies with a zero diagonal.
class DistanceMatrix
{
public:
  DistanceMatrix() = default;

  /// Wraps row-major entries after checking shape, zero diagonal,
  /// non-negativity, and symmetry within `tolerance`.
  /// Throws Error(ValidationError) on any violation.
  static DistanceMatrix validated(std::size_t n, std::vector<double> entries, double tolerance = 1e-12);

  /// Mirrors the strict upper triangle of the row-major n x n `entries` and
  /// zeroes the diagonal.
  static DistanceMatrix from_upper(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
  /// Bounds-checked access; throws Error(IndexError).
  double at(std::size_t i, std::size_t j) const;
  std::span<const double> row(std::size_t i) const noexcept { return { entries_.data() + i * n_, n_ }; }
  std::span<const double> entries() const noexcept { return entries_; }

  /// Restriction to the given indices, in the given order.
  DistanceMatrix submatrix(std::span<const std::size_t> indices) const;

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

enum class MetricKind
{
  vi_partition,
  euclidean_vector,
  precomputed
};

std::string_view metric_name(MetricKind kind) noexcept;
/// Accepts "vi", "euclidean", "precomputed". Throws Error(InvalidArgument).
MetricKind parse_metric_kind(std::string_view name);

struct MetricSpec
{
  MetricKind kind = MetricKind::vi_partition;
  std::shared_ptr<const DistanceMatrix> matrix; // required for precomputed

  static MetricSpec vi() { return { MetricKind::vi_partition, nullptr }; }
  static MetricSpec euclidean() { return { MetricKind::euclidean_vector, nullptr }; }
  static MetricSpec precomputed(std::shared_ptr<const DistanceMatrix> m)
  {
    return { MetricKind::precomputed, std::move(m) };
  }
};

/// Discrepancy between two parameters under `spec`.
/// Throws Error(MetricMismatch) for a representation the metric does not
/// accept, Error(DimensionMismatch) for size mismatches, and Error(IndexError)
/// for out-of-range precomputed indices.
double distance(const MetricSpec& spec, const Parameter& a, const Parameter& b);

/// Throws Error(MetricMismatch) unless `p` is admissible under `spec`.
void check_admissible(const MetricSpec& spec, const Parameter& p);

/// Full pairwise matrix over `items`. Only the upper triangle is evaluated;
/// rows are distributed over `threads` workers (0 = all cores) and every entry
/// is computed independently, so the result does not depend on thread count.
DistanceMatrix pairwise_distances(const MetricSpec& spec, std::span<const Parameter> items, unsigned threads = 0);

} // namespace cbi
