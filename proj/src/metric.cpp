#include "cbi/metric.hpp"

#include "cbi/error.hpp"
#include "cbi/parallel.hpp"

#include <cmath>
#include <string>

namespace cbi {

DistanceMatrix DistanceMatrix::validated(std::size_t n, std::vector<double> entries, double tolerance)
{
  if (entries.size() != n * n)
    throw Error(ErrorCode::ValidationError,
                "expected " + std::to_string(n * n) + " entries, got " + std::to_string(entries.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (entries[i * n + i] != 0.0)
      throw Error(ErrorCode::ValidationError, "non-zero diagonal at row " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double v = entries[i * n + j];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::ValidationError,
                    "invalid entry at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      if (j > i && std::abs(v - entries[j * n + i]) > tolerance)
        throw Error(ErrorCode::ValidationError,
                    "asymmetric entries at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
  DistanceMatrix m;
  m.n_ = n;
  m.entries_ = std::move(entries);
  return m;
}

DistanceMatrix DistanceMatrix::from_upper(std::size_t n, std::vector<double> entries)
{
  if (entries.size() != n * n)
    throw Error(ErrorCode::ValidationError, "distance matrix needs n * n entries");
  for (std::size_t i = 0; i < n; ++i) {
    entries[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j)
      entries[j * n + i] = entries[i * n + j];
  }
  DistanceMatrix m;
  m.n_ = n;
  m.entries_ = std::move(entries);
  return m;
}

double DistanceMatrix::at(std::size_t i, std::size_t j) const
{
  if (i >= n_ || j >= n_)
    throw Error(ErrorCode::IndexError,
                "index (" + std::to_string(i) + ", " + std::to_string(j) + ") outside " + std::to_string(n_) +
                  "x" + std::to_string(n_) + " matrix");
  return (*this)(i, j);
}

DistanceMatrix DistanceMatrix::submatrix(std::span<const std::size_t> indices) const
{
  const std::size_t m = indices.size();
  std::vector<double> sub(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      sub[a * m + b] = at(indices[a], indices[b]);
  DistanceMatrix out;
  out.n_ = m;
  out.entries_ = std::move(sub);
  return out;
}

std::string_view metric_name(MetricKind kind) noexcept
{
  switch (kind) {
    case MetricKind::vi_partition: return "vi";
    case MetricKind::euclidean_vector: return "euclidean";
    case MetricKind::precomputed: return "precomputed";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name)
{
  if (name == "vi")
    return MetricKind::vi_partition;
  if (name == "euclidean")
    return MetricKind::euclidean_vector;
  if (name == "precomputed")
    return MetricKind::precomputed;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

void check_admissible(const MetricSpec& spec, const Parameter& p)
{
  bool ok = false;
  switch (spec.kind) {
    case MetricKind::vi_partition: ok = std::holds_alternative<Partition>(p); break;
    case MetricKind::euclidean_vector: ok = std::holds_alternative<RealVector>(p); break;
    case MetricKind::precomputed:
      if (!spec.matrix)
        throw Error(ErrorCode::MetricMismatch, "precomputed metric without a distance matrix");
      ok = std::holds_alternative<SampleIndex>(p);
      break;
  }
  if (!ok)
    throw Error(ErrorCode::MetricMismatch,
                "parameter representation not accepted by metric '" + std::string(metric_name(spec.kind)) + "'");
}

namespace {

double euclidean(const RealVector& a, const RealVector& b)
{
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch,
                "vectors have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " entries");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

} // namespace

double distance(const MetricSpec& spec, const Parameter& a, const Parameter& b)
{
  switch (spec.kind) {
    case MetricKind::vi_partition: {
      const auto* pa = std::get_if<Partition>(&a);
      const auto* pb = std::get_if<Partition>(&b);
      if (!pa || !pb)
        throw Error(ErrorCode::MetricMismatch, "vi metric requires partitions");
      return vi_distance(*pa, *pb);
    }
    case MetricKind::euclidean_vector: {
      const auto* va = std::get_if<RealVector>(&a);
      const auto* vb = std::get_if<RealVector>(&b);
      if (!va || !vb)
        throw Error(ErrorCode::MetricMismatch, "euclidean metric requires real vectors");
      return euclidean(*va, *vb);
    }
    case MetricKind::precomputed: {
      const auto* ia = std::get_if<SampleIndex>(&a);
      const auto* ib = std::get_if<SampleIndex>(&b);
      if (!ia || !ib)
        throw Error(ErrorCode::MetricMismatch, "precomputed metric requires sample indices");
      if (!spec.matrix)
        throw Error(ErrorCode::MetricMismatch, "precomputed metric without a distance matrix");
      return spec.matrix->at(ia->value, ib->value);
    }
  }
  throw Error(ErrorCode::MetricMismatch, "unknown metric kind");
}

DistanceMatrix pairwise_distances(const MetricSpec& spec, std::span<const Parameter> items, unsigned threads)
{
  const std::size_t n = items.size();
  if (n == 0)
    throw Error(ErrorCode::InvalidArgument, "pairwise distances need at least one item");
  for (const auto& p : items)
    check_admissible(spec, p);

  std::vector<double> entries(n * n, 0.0);
  // Row i costs n - i - 1 evaluations; pairing row r with row n-1-r keeps
  // the static blocks balanced.
  const std::size_t pairs = (n + 1) / 2;
  parallel_for(pairs, threads, [&](std::size_t r) {
    const std::size_t rows[2] = { r, n - 1 - r };
    const std::size_t count = rows[0] == rows[1] ? 1 : 2;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = rows[k];
      for (std::size_t j = i + 1; j < n; ++j)
        entries[i * n + j] = distance(spec, items[i], items[j]);
    }
  });
  return DistanceMatrix::from_upper(n, std::move(entries));
}

} // namespace cbi
