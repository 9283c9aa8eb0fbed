#include "cbi/dpc.hpp"

#include "cbi/error.hpp"
#include "cbi/io.hpp"
#include "cbi/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace cbi {

namespace {

// Sample indices ordered from highest to lowest: score descending, index ascending.
std::vector<std::size_t> density_order(std::span<const double> scores)
{
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<double> min_max_normalized(std::span<const double> values)
{
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out(values.size(), 1.0);
  const double range = *hi - *lo;
  if (range > 0.0)
    for (std::size_t i = 0; i < values.size(); ++i)
      out[i] = (values[i] - *lo) / range;
  return out;
}

// Lower empirical quantile: the ceil(q N)-th smallest value.
double lower_quantile(std::vector<double> values, double q)
{
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

} // namespace

DeltaResult compute_deltas(std::span<const double> scores, const DistanceMatrix& distances, unsigned threads)
{
  const std::size_t n = scores.size();
  if (n == 0)
    throw Error(ErrorCode::InvalidArgument, "decision graph needs at least one sample");
  if (distances.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "distance matrix is " + std::to_string(distances.size()) + "x" + std::to_string(distances.size()) +
                  " for " + std::to_string(n) + " scores");

  const auto order = density_order(scores);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r)
    rank[order[r]] = r;

  DeltaResult result;
  result.top = order.front();
  result.points.resize(n);
  if (n == 1) {
    result.points[0] = { 0, scores[0], 0.0, std::nullopt };
    result.degenerate = true;
    return result;
  }

  parallel_for(n, threads, [&](std::size_t i) {
    DecisionPoint& p = result.points[i];
    p.index = i;
    p.score = scores[i];
    const auto row = distances.row(i);
    if (rank[i] == 0) {
      p.delta = *std::max_element(row.begin(), row.end());
      p.nearest_higher.reset();
      return;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rank[j] < rank[i] && row[j] < best) {
        best = row[j];
        arg = j;
      }
    }
    p.delta = best;
    p.nearest_higher = arg;
  });
  return result;
}

ModePolicy parse_mode_policy(std::string_view text)
{
  if (text == "auto")
    return ModePolicy::automatic();
  if (text.starts_with("top:")) {
    const std::string digits(text.substr(4));
    std::size_t used = 0;
    unsigned long m = 0;
    try {
      m = std::stoul(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == digits.size() && !digits.empty() && m > 0)
      return ModePolicy::top(m);
  }
  throw Error(ErrorCode::InvalidArgument, "mode policy must be 'auto' or 'top:<m>', got '" + std::string(text) + "'");
}

std::vector<double> decision_products(std::span<const DecisionPoint> points)
{
  std::vector<double> s(points.size()), d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    s[i] = points[i].score;
    d[i] = points[i].delta;
  }
  const auto sn = min_max_normalized(s);
  const auto dn = min_max_normalized(d);
  std::vector<double> g(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    g[i] = sn[i] * dn[i];
  return g;
}

std::vector<std::size_t> detect_modes(std::span<const DecisionPoint> points, const ModePolicy& policy)
{
  const std::size_t n = points.size();
  if (n == 0)
    throw Error(ErrorCode::InvalidArgument, "decision graph is empty");

  const auto g = decision_products(points);
  std::vector<std::size_t> ranked(n);
  std::iota(ranked.begin(), ranked.end(), std::size_t{ 0 });
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });

  std::size_t keep = 1;
  if (policy.kind == ModePolicy::Kind::top_m) {
    if (policy.m == 0 || policy.m > n)
      throw Error(ErrorCode::InvalidModeCount,
                  "requested " + std::to_string(policy.m) + " modes from " + std::to_string(n) + " samples");
    keep = policy.m;
  } else {
    const auto window = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
    double best_gap = 0.0;
    for (std::size_t i = 0; i + 1 < window; ++i) {
      const double hi = g[ranked[i]];
      const double lo = g[ranked[i + 1]];
      const double gap = hi > 0.0 ? (hi - lo) / hi : 0.0;
      if (gap > best_gap) {
        best_gap = gap;
        keep = i + 1;
      }
    }
  }

  std::vector<std::size_t> modes(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));

  // The density argmax is always a mode.
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
    scores[i] = points[i].score;
  const std::size_t top = density_order(scores).front();
  if (std::find(modes.begin(), modes.end(), top) == modes.end())
    modes.back() = top;

  std::stable_sort(modes.begin(), modes.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].score != points[b].score)
      return points[a].score > points[b].score;
    return a < b;
  });
  return modes;
}

Assignment assign_clusters(std::span<const DecisionPoint> points, std::span<const std::size_t> modes,
                           const DistanceMatrix& distances, const AssignmentOptions& options)
{
  const std::size_t n = points.size();
  if (modes.empty())
    throw Error(ErrorCode::InvalidArgument, "cluster assignment needs at least one mode");
  if (distances.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "distance matrix does not match the decision graph");
  for (std::size_t m : modes)
    if (m >= n)
      throw Error(ErrorCode::IndexError, "mode index " + std::to_string(m) + " out of range");

  Assignment a;
  a.assignments.assign(n, 0);
  std::vector<bool> is_mode(n, false);
  for (std::size_t m : modes)
    is_mode[m] = true;

  if (options.chained) {
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i)
      scores[i] = points[i].score;
    for (std::size_t i : density_order(scores)) {
      if (is_mode[i] || !points[i].nearest_higher)
        a.assignments[i] = i;
      else
        a.assignments[i] = a.assignments[*points[i].nearest_higher];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = modes[0];
      double best_d = distances(i, best);
      for (std::size_t m : modes.subspan(1)) {
        const double d = distances(i, m);
        if (d < best_d || (d == best_d && m < best)) {
          best = m;
          best_d = d;
        }
      }
      a.assignments[i] = best;
    }
  }

  a.weights.assign(modes.size(), 0.0);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto count = std::count(a.assignments.begin(), a.assignments.end(), modes[k]);
    a.weights[k] = static_cast<double>(count) / static_cast<double>(n);
  }

  std::vector<double> s(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = points[i].score;
    d[i] = points[i].delta;
  }
  const double delta_cut = lower_quantile(d, options.delta_quantile);
  const double score_cut = lower_quantile(s, options.score_quantile);
  a.outliers.assign(n, false);
  for (std::size_t i = 0; i < n; ++i)
    a.outliers[i] = d[i] > delta_cut && s[i] < score_cut;
  return a;
}

DecisionGraph build_decision_graph(std::span<const double> scores, const DistanceMatrix& distances,
                                   const ModePolicy& policy, const AssignmentOptions& options, unsigned threads)
{
  auto deltas = compute_deltas(scores, distances, threads);
  DecisionGraph g;
  g.degenerate = deltas.degenerate;
  g.points = std::move(deltas.points);
  g.modes = detect_modes(g.points, policy);
  auto assignment = assign_clusters(g.points, g.modes, distances, options);
  g.assignments.assign(assignment.assignments.begin(), assignment.assignments.end());
  g.weights = std::move(assignment.weights);
  g.outliers = std::move(assignment.outliers);
  return g;
}

std::vector<DecisionRecord> decision_records(const DecisionGraph& graph, std::span<const std::size_t> k_clusters)
{
  if (!k_clusters.empty() && k_clusters.size() != graph.points.size())
    throw Error(ErrorCode::DimensionMismatch, "cluster counts do not match the decision graph");
  std::vector<DecisionRecord> records(graph.points.size());
  for (std::size_t i = 0; i < graph.points.size(); ++i) {
    DecisionRecord& r = records[i];
    r.index = graph.points[i].index;
    r.score = graph.points[i].score;
    r.delta = graph.points[i].delta;
    if (!k_clusters.empty())
      r.k_clusters = k_clusters[i];
    r.is_mode = std::find(graph.modes.begin(), graph.modes.end(), i) != graph.modes.end();
    if (i < graph.assignments.size())
      r.assignment = graph.assignments[i];
    r.is_outlier = i < graph.outliers.size() && graph.outliers[i];
  }
  return records;
}

namespace {

constexpr std::string_view kCsvHeader = "index,score,delta,k_clusters,is_mode,assignment,is_outlier";

template<class T>
std::string optional_cell(const std::optional<T>& v)
{
  return v ? std::to_string(*v) : std::string();
}

std::optional<std::size_t> parse_optional_index(std::string_view cell, std::size_t line)
{
  if (cell.empty())
    return std::nullopt;
  return static_cast<std::size_t>(parse_integer(cell, line));
}

bool parse_flag(std::string_view cell, std::size_t line)
{
  if (cell == "1")
    return true;
  if (cell == "0")
    return false;
  throw FormatError(line, "expected 0 or 1, got '" + std::string(cell) + "'");
}

} // namespace

void write_decision_csv(std::ostream& out, std::span<const DecisionRecord> records)
{
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.index << ',' << format_real(r.score) << ',' << format_real(r.delta) << ',' << optional_cell(r.k_clusters)
        << ',' << (r.is_mode ? 1 : 0) << ',' << optional_cell(r.assignment) << ',' << (r.is_outlier ? 1 : 0) << '\n';
  }
}

void write_decision_jsonl(std::ostream& out, std::span<const DecisionRecord> records)
{
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["index"] = r.index;
    j["score"] = r.score;
    j["delta"] = r.delta;
    j["k_clusters"] = r.k_clusters ? nlohmann::ordered_json(*r.k_clusters) : nlohmann::ordered_json(nullptr);
    j["is_mode"] = r.is_mode;
    j["assignment"] = r.assignment ? nlohmann::ordered_json(*r.assignment) : nlohmann::ordered_json(nullptr);
    j["is_outlier"] = r.is_outlier;
    out << j.dump() << '\n';
  }
}

std::vector<DecisionRecord> read_decision_csv(std::istream& in)
{
  std::vector<DecisionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader)
        throw FormatError(line_no, "unexpected decision graph header");
      continue;
    }
    if (line.empty())
      continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 7)
      throw FormatError(line_no, "expected 7 columns, got " + std::to_string(cells.size()));
    DecisionRecord r;
    r.index = static_cast<std::size_t>(parse_integer(cells[0], line_no));
    r.score = parse_real(cells[1], line_no);
    r.delta = parse_real(cells[2], line_no);
    r.k_clusters = parse_optional_index(cells[3], line_no);
    r.is_mode = parse_flag(cells[4], line_no);
    r.assignment = parse_optional_index(cells[5], line_no);
    r.is_outlier = parse_flag(cells[6], line_no);
    records.push_back(r);
  }
  return records;
}

std::vector<DecisionRecord> read_decision_jsonl(std::istream& in)
{
  std::vector<DecisionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DecisionRecord r;
      r.index = j.at("index").get<std::size_t>();
      r.score = j.at("score").get<double>();
      r.delta = j.at("delta").get<double>();
      if (!j.at("k_clusters").is_null())
        r.k_clusters = j.at("k_clusters").get<std::size_t>();
      r.is_mode = j.at("is_mode").get<bool>();
      if (!j.at("assignment").is_null())
        r.assignment = j.at("assignment").get<std::size_t>();
      r.is_outlier = j.at("is_outlier").get<bool>();
      records.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(line_no, e.what());
    }
  }
  return records;
}

} // namespace cbi
