#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cbi {

/// A set partition of n items stored as a canonical label vector.
///
/// Labels are renumbered by first appearance: labels[0] == 0 and label m > 0
/// first occurs after m - 1. Two partitions are equal iff their canonical
/// vectors are identical, so equality does not depend on the labelling used
/// by whatever sampler produced them. Instances are immutable.
class Partition
{
public:
  using Label = std::uint32_t;

  /// Canonicalizes an arbitrary integer label sequence.
  /// Throws Error(EmptyPartition) on an empty sequence.
  static Partition from_labels(std::span<const std::int64_t> raw);
  static Partition from_labels(std::initializer_list<std::int64_t> raw);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_clusters() const noexcept { return cluster_sizes_.size(); }
  std::span<const Label> labels() const noexcept { return labels_; }
  Label operator[](std::size_t i) const noexcept { return labels_[i]; }
  std::span<const std::uint32_t> cluster_sizes() const noexcept { return cluster_sizes_; }

  // Sum over items of log2(size of the item's cluster); cached for VI.
  double item_log_mass() const noexcept { return item_log_mass_; }

  friend bool operator==(const Partition& a, const Partition& b) noexcept
  {
    return a.labels_ == b.labels_;
  }

private:
  Partition() = default;

  std::vector<Label> labels_;
  std::vector<std::uint32_t> cluster_sizes_;
  double item_log_mass_ = 0.0;
};

/// Free-function form of Partition::from_labels.
Partition canonicalize(std::span<const std::int64_t> raw);

/// Cross-tabulation of two partitions of the same items.
struct ContingencyTable
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t n = 0;
  std::vector<std::uint32_t> counts; // row-major rows x cols
  std::vector<std::uint32_t> row_sums;
  std::vector<std::uint32_t> col_sums;

  std::uint32_t at(std::size_t j, std::size_t k) const { return counts[j * cols + k]; }
};

/// Throws Error(DimensionMismatch) when a.size() != b.size().
ContingencyTable contingency(const Partition& a, const Partition& b);

/// Variation of Information between two partitions, in bits.
///
/// Evaluated as (1/n) [sum_i log2 n_a(i) + sum_i log2 n_b(i) - 2 sum_i log2 n_ab(i)]
/// where n_a(i), n_b(i), n_ab(i) are the sizes of the blocks of a, b and of
/// their intersection containing item i. The item-order sums make the result
/// bit-for-bit symmetric in (a, b) and exactly zero for equal partitions.
/// The value is clamped to [0, log2 n].
double vi_distance(const Partition& a, const Partition& b);

} // namespace cbi
