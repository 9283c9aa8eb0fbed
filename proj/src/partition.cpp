#include "cbi/partition.hpp"

#include "cbi/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cbi {

namespace {

// log2(c) for c = 0..n, grown on demand. Entry 0 is never read for a
// non-empty block. Same values everywhere, so sums that visit the same
// counts in the same order are bit-identical.
const double* log2_table(std::size_t n)
{
  thread_local std::vector<double> table{ 0.0 };
  if (table.size() <= n) {
    std::size_t old = table.size();
    table.resize(n + 1);
    for (std::size_t c = old; c <= n; ++c)
      table[c] = std::log2(static_cast<double>(c));
  }
  return table.data();
}

} // namespace

Partition Partition::from_labels(std::span<const std::int64_t> raw)
{
  if (raw.empty())
    throw Error(ErrorCode::EmptyPartition, "label sequence is empty");

  Partition p;
  p.labels_.resize(raw.size());
  std::unordered_map<std::int64_t, Label> remap;
  remap.reserve(16);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw[i], static_cast<Label>(remap.size()));
    if (inserted)
      p.cluster_sizes_.push_back(0);
    p.labels_[i] = it->second;
    ++p.cluster_sizes_[it->second];
  }

  const double* lg = log2_table(raw.size());
  double mass = 0.0;
  for (Label l : p.labels_)
    mass += lg[p.cluster_sizes_[l]];
  p.item_log_mass_ = mass;
  return p;
}

Partition Partition::from_labels(std::initializer_list<std::int64_t> raw)
{
  return from_labels(std::span<const std::int64_t>(raw.begin(), raw.size()));
}

Partition canonicalize(std::span<const std::int64_t> raw)
{
  return Partition::from_labels(raw);
}

ContingencyTable contingency(const Partition& a, const Partition& b)
{
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch,
                "partitions have " + std::to_string(a.size()) + " and " +
                  std::to_string(b.size()) + " items");
  ContingencyTable t;
  t.rows = a.num_clusters();
  t.cols = b.num_clusters();
  t.n = a.size();
  t.counts.assign(t.rows * t.cols, 0);
  for (std::size_t i = 0; i < t.n; ++i)
    ++t.counts[a[i] * t.cols + b[i]];
  t.row_sums.assign(a.cluster_sizes().begin(), a.cluster_sizes().end());
  t.col_sums.assign(b.cluster_sizes().begin(), b.cluster_sizes().end());
  return t;
}

double vi_distance(const Partition& a, const Partition& b)
{
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch,
                "partitions have " + std::to_string(a.size()) + " and " +
                  std::to_string(b.size()) + " items");
  if (a == b)
    return 0.0;

  const std::size_t n = a.size();
  const std::size_t cols = b.num_clusters();
  thread_local std::vector<std::uint32_t> counts;
  counts.assign(a.num_clusters() * cols, 0);
  const auto la = a.labels();
  const auto lb = b.labels();
  for (std::size_t i = 0; i < n; ++i)
    ++counts[la[i] * cols + lb[i]];

  const double* lg = log2_table(n);
  double joint = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    joint += lg[counts[la[i] * cols + lb[i]]];

  const double value = (a.item_log_mass() + b.item_log_mass() - 2.0 * joint) / static_cast<double>(n);
  return std::clamp(value, 0.0, lg[n]);
}

} // namespace cbi
