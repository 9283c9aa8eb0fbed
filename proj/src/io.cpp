#include "cbi/io.hpp"

#include "cbi/error.hpp"
#include "cbi/random.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace cbi {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_real(double value)
{
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Calls row(cells, line_no) for every non-blank line after the optional header.
template<class RowFn>
void for_each_row(std::istream& in, bool header, RowFn&& row)
{
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1)
      continue;
    if (trim(line).empty())
      continue;
    row(split_csv_line(line), line_no);
  }
}

} // namespace

std::vector<std::string_view> split_csv_line(std::string_view line)
{
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::int64_t parse_integer(std::string_view cell, std::size_t line)
{
  cell = trim(cell);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw FormatError(line, "expected an integer, got '" + std::string(cell) + "'");
  return value;
}

double parse_real(std::string_view cell, std::size_t line)
{
  cell = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw FormatError(line, "expected a real number, got '" + std::string(cell) + "'");
  return value;
}

std::vector<Partition> read_partitions_csv(std::istream& in, bool header)
{
  std::vector<Partition> out;
  std::size_t width = 0;
  std::vector<std::int64_t> labels;
  for_each_row(in, header, [&](const std::vector<std::string_view>& cells, std::size_t line) {
    if (out.empty())
      width = cells.size();
    else if (cells.size() != width)
      throw FormatError(line, "expected " + std::to_string(width) + " columns, got " + std::to_string(cells.size()));
    labels.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      labels[i] = parse_integer(cells[i], line);
    out.push_back(Partition::from_labels(labels));
  });
  return out;
}

std::vector<RealVector> read_vectors_csv(std::istream& in, bool header)
{
  std::vector<RealVector> out;
  std::size_t width = 0;
  for_each_row(in, header, [&](const std::vector<std::string_view>& cells, std::size_t line) {
    if (out.empty())
      width = cells.size();
    else if (cells.size() != width)
      throw FormatError(line, "expected " + std::to_string(width) + " columns, got " + std::to_string(cells.size()));
    RealVector v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      v[i] = parse_real(cells[i], line);
    out.push_back(std::move(v));
  });
  return out;
}

DistanceMatrix read_distance_csv(std::istream& in, bool header)
{
  auto rows = read_vectors_csv(in, header);
  const std::size_t n = rows.size();
  if (n == 0)
    throw Error(ErrorCode::ValidationError, "distance matrix is empty");
  if (rows.front().size() != n)
    throw Error(ErrorCode::ValidationError,
                "distance matrix has " + std::to_string(n) + " rows and " + std::to_string(rows.front().size()) +
                  " columns");
  std::vector<double> entries;
  entries.reserve(n * n);
  for (auto& r : rows)
    entries.insert(entries.end(), r.begin(), r.end());
  return DistanceMatrix::validated(n, std::move(entries));
}

void write_partitions_csv(std::ostream& out, std::span<const Partition> partitions)
{
  for (const auto& p : partitions) {
    const auto labels = p.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i)
        out << ',';
      out << labels[i];
    }
    out << '\n';
  }
}

void write_vectors_csv(std::ostream& out, std::span<const RealVector> vectors)
{
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i)
        out << ',';
      out << format_real(v[i]);
    }
    out << '\n';
  }
}

void write_distance_csv(std::ostream& out, const DistanceMatrix& matrix)
{
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto row = matrix.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j)
        out << ',';
      out << format_real(row[j]);
    }
    out << '\n';
  }
}

std::ifstream open_input(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IOError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IOError, "cannot open '" + path.string() + "' for writing");
  return out;
}

MetricSpec SampleData::metric(MetricKind kind) const
{
  if (distances)
    return MetricSpec::precomputed(distances);
  return { kind, nullptr };
}

SampleData load_samples(const SampleFile& file)
{
  auto in = open_input(file.path);
  SampleData data;
  switch (file.format) {
    case SampleFormat::partition_csv: {
      auto parts = read_partitions_csv(in, file.header);
      data.column_count = parts.empty() ? 0 : parts.front().size();
      for (auto& p : parts)
        data.parameters.emplace_back(std::move(p));
      break;
    }
    case SampleFormat::vector_csv: {
      auto vecs = read_vectors_csv(in, file.header);
      data.column_count = vecs.empty() ? 0 : vecs.front().size();
      for (auto& v : vecs)
        data.parameters.emplace_back(std::move(v));
      break;
    }
    case SampleFormat::distance_csv: {
      auto m = std::make_shared<const DistanceMatrix>(read_distance_csv(in, file.header));
      data.column_count = m->size();
      for (std::size_t i = 0; i < m->size(); ++i)
        data.parameters.emplace_back(SampleIndex{ i });
      data.distances = std::move(m);
      break;
    }
  }
  data.row_count = data.parameters.size();
  return data;
}

void save_parameters(const std::filesystem::path& path, std::span<const Parameter> parameters)
{
  auto out = open_output(path);
  for (const auto& p : parameters) {
    if (const auto* part = std::get_if<Partition>(&p)) {
      write_partitions_csv(out, std::span<const Partition>(part, 1));
    } else if (const auto* vec = std::get_if<RealVector>(&p)) {
      write_vectors_csv(out, std::span<const RealVector>(vec, 1));
    } else {
      out << std::get<SampleIndex>(p).value << '\n';
    }
  }
}

SampleFormat sample_format_for(MetricKind kind) noexcept
{
  switch (kind) {
    case MetricKind::vi_partition: return SampleFormat::partition_csv;
    case MetricKind::euclidean_vector: return SampleFormat::vector_csv;
    case MetricKind::precomputed: return SampleFormat::distance_csv;
  }
  return SampleFormat::partition_csv;
}

SampleSet split_samples(std::vector<Parameter> items, const SplitSpec& split)
{
  const std::size_t total = items.size();
  if (split.kind == SplitSpec::Kind::first_s) {
    if (split.first_s < 1 || split.first_s >= total)
      throw Error(ErrorCode::InvalidSplit,
                  "first_s = " + std::to_string(split.first_s) + " invalid for " + std::to_string(total) + " samples");
    return SampleSet(std::move(items), split.first_s, split);
  }

  if (!(split.fraction > 0.0 && split.fraction < 1.0))
    throw Error(ErrorCode::InvalidSplit, "split fraction must lie in (0, 1)");
  const auto s = static_cast<std::size_t>(std::llround(split.fraction * static_cast<double>(total)));
  if (s < 1 || s >= total)
    throw Error(ErrorCode::InvalidSplit,
                "fraction " + format_real(split.fraction) + " of " + std::to_string(total) + " samples leaves an empty side");

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  Rng rng(split.seed);
  for (std::size_t i = total; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<Parameter> shuffled;
  shuffled.reserve(total);
  for (std::size_t idx : order)
    shuffled.push_back(std::move(items[idx]));
  return SampleSet(std::move(shuffled), s, split, std::move(order));
}

namespace {

json optional_json(const std::optional<std::size_t>& v)
{
  return v ? json(*v) : json(nullptr);
}

json finite_or_null(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

ordered_json report_json(const ConformalReport& r)
{
  ordered_json j;
  j["score"] = finite_or_null(r.score);
  j["p_value"] = r.p_value;
  j["threshold_rank"] = r.threshold_rank;
  j["threshold_score"] = finite_or_null(r.threshold_score);
  j["in_region"] = r.in_region;
  j["calibration_size"] = r.calibration_size;
  j["degenerate"] = r.degenerate;
  return j;
}

} // namespace

void write_score_file(const std::filesystem::path& path, const ScoreFile& file)
{
  ordered_json j;
  j["metric"] = std::string(metric_name(file.metric));
  j["gamma"] = file.table.gamma();
  j["subsample_size"] = optional_json(file.table.subsample_size());
  j["seed"] = file.table.seed();
  j["total_samples"] = file.total_samples;
  ordered_json split;
  split["kind"] = file.split.kind == SplitSpec::Kind::first_s ? "first_s" : "fraction";
  split["first_s"] = file.split.first_s;
  split["fraction"] = file.split.fraction;
  split["seed"] = file.split.seed;
  j["split"] = split;
  j["scores"] = std::vector<double>(file.table.scores().begin(), file.table.scores().end());
  auto out = open_output(path);
  out << j.dump(1) << '\n';
}

ScoreFile read_score_file(const std::filesystem::path& path)
{
  auto in = open_input(path);
  try {
    const json j = json::parse(in);
    SplitSpec split;
    const auto& js = j.at("split");
    const auto kind = js.at("kind").get<std::string>();
    if (kind == "first_s")
      split.kind = SplitSpec::Kind::first_s;
    else if (kind == "fraction")
      split.kind = SplitSpec::Kind::fraction;
    else
      throw Error(ErrorCode::FormatError, "unknown split kind '" + kind + "'");
    split.first_s = js.at("first_s").get<std::size_t>();
    split.fraction = js.at("fraction").get<double>();
    split.seed = js.at("seed").get<std::uint64_t>();

    std::optional<std::size_t> subsample;
    if (!j.at("subsample_size").is_null())
      subsample = j.at("subsample_size").get<std::size_t>();
    ScoreTable table(j.at("scores").get<std::vector<double>>(), j.at("gamma").get<double>(), subsample,
                     j.at("seed").get<std::uint64_t>());
    return ScoreFile{ std::move(table), split, parse_metric_kind(j.at("metric").get<std::string>()),
                      j.at("total_samples").get<std::size_t>() };
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "score file '" + path.string() + "': " + e.what());
  }
}

std::string to_json(const ConformalReport& report)
{
  return report_json(report).dump();
}

std::string to_json(const BallReport& report)
{
  ordered_json j;
  j["distance"] = report.distance;
  j["radius"] = finite_or_null(report.radius);
  j["radius_rank"] = report.radius_rank;
  j["unbounded"] = report.unbounded;
  j["in_region"] = report.in_region;
  j["equivalent"] = report_json(report.equivalent);
  return j.dump();
}

std::string to_json(const ConcentrationCertificate& c)
{
  ordered_json j;
  j["alpha"] = c.alpha;
  j["n"] = c.n;
  j["delta"] = c.delta;
  j["threshold_rank"] = c.threshold_rank;
  j["term_rank"] = c.term_rank;
  j["term_jump"] = c.term_jump;
  j["term_dkw"] = c.term_dkw;
  j["total_bound"] = c.total_bound;
  j["degenerate"] = c.degenerate;
  return j.dump();
}

} // namespace cbi
