#include "cbi/cli.hpp"

#include "cbi/conformal.hpp"
#include "cbi/demo1d.hpp"
#include "cbi/error.hpp"
#include "cbi/io.hpp"
#include "cbi/parallel.hpp"
#include "cbi/synth.hpp"
#include "cbi/thinning.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace cbi {

using Json = nlohmann::ordered_json;

SplitSpec RunConfig::split_for(std::size_t total) const
{
  if (split_fraction)
    return SplitSpec::shuffled(*split_fraction, seed);
  return SplitSpec::prefix(split_first_s ? *split_first_s : total / 2);
}

namespace {

// Writes to -o when given, otherwise to the command's stdout.
void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& body)
{
  if (cfg.output.empty()) {
    body(out);
    return;
  }
  auto file = open_output(cfg.output);
  body(file);
  if (!file)
    throw Error(ErrorCode::IOError, "failed writing " + cfg.output.string());
}

Json parameter_json(const Parameter& p)
{
  if (const auto* part = std::get_if<Partition>(&p))
    return Json(part->labels());
  if (const auto* v = std::get_if<RealVector>(&p))
    return Json(*v);
  return Json(std::get<SampleIndex>(p).value);
}

Json parse_record(const std::string& text)
{
  return Json::parse(text);
}

SampleData load_input(const RunConfig& cfg, MetricKind kind)
{
  return load_samples({ sample_format_for(kind), cfg.input, cfg.header });
}

// Candidate parameters in the representation matching `kind`. Precomputed
// metrics take one matrix row index per line.
std::vector<Parameter> load_candidates(const RunConfig& cfg, MetricKind kind)
{
  auto in = open_input(cfg.candidates);
  std::vector<Parameter> out;
  if (kind == MetricKind::vi_partition) {
    for (auto& p : read_partitions_csv(in, cfg.header))
      out.emplace_back(std::move(p));
  } else if (kind == MetricKind::euclidean_vector) {
    for (auto& v : read_vectors_csv(in, cfg.header))
      out.emplace_back(std::move(v));
  } else {
    std::string line;
    std::size_t line_no = 0;
    if (cfg.header && std::getline(in, line))
      ++line_no;
    while (std::getline(in, line)) {
      ++line_no;
      const auto cells = split_csv_line(line);
      if (cells.size() == 1 && cells[0].empty())
        continue;
      if (cells.size() != 1)
        throw FormatError(line_no, "expected one matrix index per line");
      const auto v = parse_integer(cells[0], line_no);
      if (v < 0)
        throw FormatError(line_no, "negative matrix index");
      out.emplace_back(SampleIndex{ static_cast<std::size_t>(v) });
    }
  }
  if (out.empty())
    throw Error(ErrorCode::InvalidArgument, "candidate file is empty");
  return out;
}

// Sample set, metric and scores reconstructed from a score file and the
// samples it was computed from.
struct Scored
{
  ScoreFile file;
  SampleData data;
  MetricSpec metric;
  std::optional<SampleSet> samples;
};

Scored load_scored(const RunConfig& cfg)
{
  Scored s{ read_score_file(cfg.scores), {}, {}, std::nullopt };
  s.data = load_input(cfg, s.file.metric);
  s.metric = s.data.metric(s.file.metric);
  if (s.data.parameters.size() != s.file.total_samples)
    throw Error(ErrorCode::ValidationError, "score file was computed from " + std::to_string(s.file.total_samples) +
                                              " samples, input has " + std::to_string(s.data.parameters.size()));
  s.samples.emplace(split_samples(s.data.parameters, s.file.split));
  if (s.samples->calibration_size() != s.file.table.size())
    throw Error(ErrorCode::ValidationError, "score count does not match the calibration size");
  return s;
}

std::optional<ParameterFilter> make_filter(const RunConfig& cfg)
{
  if (!cfg.filter_max_k)
    return std::nullopt;
  return ParameterFilter(ClusterCountFilter{ std::nullopt, cfg.filter_max_k });
}

int cmd_score(const RunConfig& cfg, std::ostream& out)
{
  SampleData data = load_input(cfg, cfg.metric);
  const MetricSpec metric = data.metric(cfg.metric);
  const std::size_t total = data.parameters.size();
  const SplitSpec split = cfg.split_for(total);
  const SampleSet samples = split_samples(std::move(data.parameters), split);
  ScoreTable table = score_calibration(samples, metric, { cfg.gamma, cfg.subsample, cfg.seed, cfg.threads });

  const ScoreFile file{ std::move(table), samples.split(), cfg.metric, total };
  if (cfg.output.empty())
    throw Error(ErrorCode::InvalidArgument, "score needs an output path (-o)");
  write_score_file(cfg.output, file);

  const auto sorted = file.table.sorted();
  Json summary;
  summary["training_size"] = samples.training_size();
  summary["calibration_size"] = samples.calibration_size();
  summary["gamma"] = file.table.gamma();
  summary["min_score"] = sorted.front();
  summary["max_score"] = sorted.back();
  out << summary.dump() << '\n';
  return 0;
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out)
{
  const Scored s = load_scored(cfg);
  const auto filter = make_filter(cfg);
  const PointEstimate est = point_estimate(*s.samples, s.file.table, filter ? *filter : ParameterFilter{});

  Json j;
  j["calibration_index"] = est.calibration_index;
  j["sample_index"] = est.sample_index;
  j["source_row"] = s.samples->source_order()[est.sample_index];
  j["score"] = est.score;
  if (const auto* part = std::get_if<Partition>(&est.parameter))
    j["num_clusters"] = part->num_clusters();
  j["parameter"] = parameter_json(est.parameter);
  emit(cfg, out, [&](std::ostream& o) { o << j.dump() << '\n'; });
  return 0;
}

// Training-set pseudo-MAP, so the ball center never sees calibration data.
Parameter training_center(const SampleSet& samples, const MetricSpec& metric, double gamma, unsigned threads)
{
  const auto train = samples.training();
  std::vector<double> scores(train.size());
  parallel_for(train.size(), threads, [&](std::size_t i) { scores[i] = score(train[i], train, metric, gamma); });
  const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
  return train[static_cast<std::size_t>(best)];
}

int cmd_test(const RunConfig& cfg, std::ostream& out)
{
  const Scored s = load_scored(cfg);
  const SampleSet& samples = *s.samples;
  const ConformalConfig conformal{ cfg.alpha };
  conformal.validate();
  const auto candidates = load_candidates(cfg, s.file.metric);
  const auto filter = make_filter(cfg);

  std::optional<Parameter> center;
  std::vector<double> calibration_distances;
  if (cfg.ball) {
    if (!cfg.center.empty()) {
      RunConfig c = cfg;
      c.candidates = cfg.center;
      center = load_candidates(c, s.file.metric).front();
    } else {
      center = training_center(samples, s.metric, s.file.table.gamma(), cfg.threads);
    }
    const auto cal = samples.calibration();
    calibration_distances.resize(cal.size());
    parallel_for(cal.size(), cfg.threads,
                 [&](std::size_t i) { calibration_distances[i] = distance(s.metric, cal[i], *center); });
  }

  std::vector<std::string> lines(candidates.size());
  parallel_for(candidates.size(), cfg.threads, [&](std::size_t i) {
    const Parameter& theta = candidates[i];
    const ConformalReport report =
      filter ? conditional_region(theta, samples, s.file.table, conformal, s.metric, *filter, i)
             : region_membership(theta, samples, s.file.table, conformal, s.metric, i);
    Json j;
    j["candidate"] = i;
    j["kde"] = parse_record(to_json(report));
    if (center) {
      const BallReport ball = ball_region(distance(s.metric, theta, *center), calibration_distances, conformal);
      j["ball"] = parse_record(to_json(ball));
    }
    lines[i] = j.dump();
  });

  emit(cfg, out, [&](std::ostream& o) {
    for (const auto& l : lines)
      o << l << '\n';
  });
  return 0;
}

int cmd_dpc(const RunConfig& cfg, std::ostream& out)
{
  const Scored s = load_scored(cfg);
  const SampleSet& samples = *s.samples;
  const ModePolicy policy = parse_mode_policy(cfg.mode_policy);
  const DistanceMatrix distances = pairwise_distances(s.metric, samples.calibration(), cfg.threads);
  const DecisionGraph graph =
    build_decision_graph(s.file.table.scores(), distances, policy, cfg.assignment, cfg.threads);

  std::vector<std::size_t> k_clusters;
  if (s.file.metric == MetricKind::vi_partition)
    for (const auto& p : samples.calibration())
      k_clusters.push_back(std::get<Partition>(p).num_clusters());
  const auto records = decision_records(graph, k_clusters);

  if (cfg.output.empty()) {
    write_decision_csv(out, records);
    return 0;
  }
  {
    auto csv = open_output(std::filesystem::path(cfg.output).concat(".csv"));
    write_decision_csv(csv, records);
    auto jsonl = open_output(std::filesystem::path(cfg.output).concat(".jsonl"));
    write_decision_jsonl(jsonl, records);
  }

  Json modes = Json::array();
  for (std::size_t m = 0; m < graph.modes.size(); ++m) {
    const auto i = graph.modes[m];
    Json j;
    j["calibration_index"] = i;
    j["source_row"] = samples.source_order()[samples.training_size() + i];
    j["score"] = graph.points[i].score;
    j["delta"] = graph.points[i].delta;
    j["weight"] = graph.weights.empty() ? 0.0 : graph.weights[m];
    if (!k_clusters.empty())
      j["k_clusters"] = k_clusters[i];
    modes.push_back(std::move(j));
  }
  Json summary;
  summary["calibration_size"] = samples.calibration_size();
  summary["modes"] = std::move(modes);
  summary["outliers"] = std::count(graph.outliers.begin(), graph.outliers.end(), true);
  summary["degenerate"] = graph.degenerate;
  out << summary.dump() << '\n';
  return 0;
}

struct ThinArgs
{
  std::optional<double> c;
  std::optional<double> rho;
  std::filesystem::path eps_file;
  std::size_t n = 0;
  std::optional<double> budget;
  std::optional<std::size_t> gap;
};

int cmd_thin(const RunConfig& cfg, const ThinArgs& a, std::ostream& out)
{
  MixingModel model;
  Json j;
  if (!a.eps_file.empty()) {
    auto in = open_input(a.eps_file);
    TabulatedMixing tab;
    for (const auto& row : read_vectors_csv(in, cfg.header))
      tab.eps.insert(tab.eps.end(), row.begin(), row.end());
    model = std::move(tab);
    j["model"] = "tabulated";
  } else {
    model = GeometricMixing{ a.c.value_or(1.0), a.rho.value_or(0.5) };
    j["model"] = "geometric";
  }
  validate(model);
  j["n"] = a.n;
  if (a.gap) {
    j["gap"] = *a.gap;
    j["tv_bound"] = tv_bound(model, a.n, *a.gap);
  } else {
    if (!a.budget)
      throw Error(ErrorCode::InvalidArgument, "thin needs --budget or --gap");
    const std::size_t m = min_thinning(model, a.n, *a.budget);
    j["budget"] = *a.budget;
    j["min_thinning"] = m;
    j["tv_bound"] = tv_bound(model, a.n, m);
  }
  emit(cfg, out, [&](std::ostream& o) { o << j.dump() << '\n'; });
  return 0;
}

int cmd_certify(const RunConfig& cfg, std::ostream& out)
{
  const ScoreFile file = read_score_file(cfg.scores);
  const ConcentrationCertificate cert = concentration_certificate(file.table, { cfg.alpha }, cfg.delta);
  emit(cfg, out, [&](std::ostream& o) { o << to_json(cert) << '\n'; });
  return 0;
}

int cmd_demo(const RunConfig& cfg, Demo1dConfig demo, bool seed_given, std::ostream& out)
{
  if (seed_given)
    demo.seed = cfg.seed;
  demo.alpha = cfg.alpha;
  demo.threads = cfg.threads;
  const Demo1dResult r = run_demo_1d(demo);
  emit(cfg, out, [&](std::ostream& o) { o << to_json(r) << '\n'; });
  return 0;
}

struct RandomArgs
{
  std::size_t n = 0;
  std::size_t count = 1000;
  std::optional<std::size_t> k_max;
  std::filesystem::path k_from_samples;
};

int cmd_random(const RunConfig& cfg, const RandomArgs& a, std::ostream& out)
{
  RandomPartitionSpec spec;
  spec.seed = cfg.seed;
  if (!a.k_from_samples.empty()) {
    auto in = open_input(a.k_from_samples);
    const auto reference = read_partitions_csv(in, cfg.header);
    if (reference.empty())
      throw Error(ErrorCode::InvalidArgument, "reference sample file is empty");
    spec.n = a.n ? a.n : reference.front().size();
    spec.k_distribution = cluster_count_distribution(reference);
  } else {
    spec.n = a.n;
    const std::size_t k = a.k_max.value_or(a.n);
    if (k == 0)
      throw Error(ErrorCode::InvalidArgument, "random-partitions needs --k-max >= 1");
    spec.k_distribution.assign(k, 1.0 / static_cast<double>(k));
  }
  const auto parts = random_partitions(spec, a.count);
  emit(cfg, out, [&](std::ostream& o) { write_partitions_csv(o, parts); });
  return 0;
}

struct FixtureArgs
{
  std::size_t n = 100;
  std::size_t modes = 2;
  std::size_t clusters = 4;
  std::vector<double> weights;
  std::size_t flips = 5;
  std::size_t size = 2500;
};

int cmd_fixture(const RunConfig& cfg, const FixtureArgs& a, std::ostream& out)
{
  if (a.modes < 1 || a.modes > 2)
    throw Error(ErrorCode::InvalidArgument, "fixture supports 1 or 2 modes");
  if (a.size < 2)
    throw Error(ErrorCode::InvalidArgument, "fixture needs at least 2 samples");
  std::vector<Partition> bases{ block_partition(a.n, a.clusters) };
  if (a.modes == 2)
    bases.push_back(strided_partition(a.n, a.clusters));
  std::vector<double> weights = a.weights;
  if (weights.empty())
    weights = a.modes == 2 ? std::vector<double>{ 0.6, 0.4 } : std::vector<double>{ 1.0 };
  const auto post = perturbed_posterior(bases, weights, a.flips, a.size, cfg.seed, SplitSpec::prefix(a.size - 1));
  std::vector<Partition> parts;
  parts.reserve(a.size);
  for (const auto& p : post.samples.all())
    parts.push_back(std::get<Partition>(p));
  emit(cfg, out, [&](std::ostream& o) { write_partitions_csv(o, parts); });
  return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Conformal credible regions and multimodality analysis for Monte Carlo samples", "cbi" };
  app.require_subcommand(1);

  RunConfig cfg;
  std::string metric = "vi";
  ThinArgs thin;
  Demo1dConfig demo;
  RandomArgs random;
  FixtureArgs fixture;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
    sub->add_option("--seed", cfg.seed, "Master RNG seed");
    sub->add_option("-o,--output", cfg.output, "Output path");
    sub->add_flag("--header", cfg.header, "Input CSV files start with a header line");
  };
  auto add_samples = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input, "Sample file (one sample per row)")->required();
  };
  auto add_scores = [&](CLI::App* sub) {
    sub->add_option("--scores", cfg.scores, "Score file written by `cbi score`")->required();
  };

  auto* score = app.add_subcommand("score", "Score calibration samples against the training samples");
  add_common(score);
  add_samples(score);
  score->add_option("--metric", metric, "vi | euclidean | precomputed")
    ->check(CLI::IsMember({ "vi", "euclidean", "precomputed" }));
  score->add_option("--gamma", cfg.gamma, "Kernel bandwidth");
  auto* first_s = score->add_option("--split-first-s", cfg.split_first_s, "Training prefix length S");
  auto* fraction = score->add_option("--split-fraction", cfg.split_fraction, "Shuffled split, training fraction");
  first_s->excludes(fraction);
  score->add_option("--subsample", cfg.subsample, "Training samples drawn per score");

  auto* estimate = app.add_subcommand("estimate", "Highest-scoring calibration sample");
  add_common(estimate);
  add_samples(estimate);
  add_scores(estimate);
  estimate->add_option("--filter-max-k", cfg.filter_max_k, "Only partitions with at most this many clusters");

  auto* test = app.add_subcommand("test", "Credible-region membership of candidate parameters");
  add_common(test);
  add_samples(test);
  add_scores(test);
  test->add_option("--candidates", cfg.candidates, "Candidate file, same format as the samples")->required();
  test->add_option("--alpha", cfg.alpha, "Miscoverage level");
  test->add_flag("--ball", cfg.ball, "Also report the credible-ball verdict");
  test->add_option("--center", cfg.center, "Ball center file (default: training pseudo-MAP)");
  test->add_option("--filter-max-k", cfg.filter_max_k, "Condition on at most this many clusters");

  auto* dpc = app.add_subcommand("dpc", "Decision graph, modes and cluster weights of the calibration samples");
  add_common(dpc);
  add_samples(dpc);
  add_scores(dpc);
  dpc->add_option("--mode-policy", cfg.mode_policy, "auto | top:<m>");
  dpc->add_flag("--chained", cfg.assignment.chained, "Assign along nearest-higher links");
  dpc->add_option("--delta-quantile", cfg.assignment.delta_quantile, "Outlier delta quantile");
  dpc->add_option("--score-quantile", cfg.assignment.score_quantile, "Outlier score quantile");

  auto* thin_cmd = app.add_subcommand("thin", "Thinning gap for a total-variation budget");
  add_common(thin_cmd);
  thin_cmd->add_option("--c", thin.c, "Geometric mixing constant");
  thin_cmd->add_option("--rho", thin.rho, "Geometric mixing rate");
  auto* eps = thin_cmd->add_option("--eps-file", thin.eps_file, "Tabulated mixing rates eps_1, eps_2, ...");
  eps->excludes(thin_cmd->get_option("--rho"));
  thin_cmd->add_option("--n", thin.n, "Calibration size N")->required();
  thin_cmd->add_option("--budget", thin.budget, "Total-variation budget");
  thin_cmd->add_option("--gap", thin.gap, "Evaluate the bound at this gap instead");

  auto* certify = app.add_subcommand("certify", "Concentration bound on the region's posterior mass");
  add_common(certify);
  add_scores(certify);
  certify->add_option("--alpha", cfg.alpha, "Miscoverage level");
  certify->add_option("--delta", cfg.delta, "Failure probability of the bound");

  auto* demo_cmd = app.add_subcommand("demo-1d", "KDE set against credible balls on a bimodal 1-D mixture");
  add_common(demo_cmd);
  demo_cmd->add_option("--alpha", cfg.alpha, "Miscoverage level");
  demo_cmd->add_option("--gamma", demo.gamma, "Kernel bandwidth");
  demo_cmd->add_option("--draws", demo.coverage_draws, "Fresh draws for the coverage estimate");

  auto* random_cmd = app.add_subcommand("random-partitions", "Random partitions for size checks");
  add_common(random_cmd);
  random_cmd->add_option("--n", random.n, "Items per partition");
  random_cmd->add_option("--count", random.count, "Number of partitions");
  auto* k_max = random_cmd->add_option("--k-max", random.k_max, "Cluster count uniform on 1..k-max");
  random_cmd->add_option("--k-from-samples", random.k_from_samples, "Match the cluster-count distribution of a file")
    ->excludes(k_max);

  auto* fixture_cmd = app.add_subcommand("fixture", "Perturbed-base synthetic posterior samples");
  add_common(fixture_cmd);
  fixture_cmd->add_option("--n", fixture.n, "Items per partition");
  fixture_cmd->add_option("--modes", fixture.modes, "Number of bases (1 or 2)");
  fixture_cmd->add_option("--clusters", fixture.clusters, "Clusters per base");
  fixture_cmd->add_option("--weights", fixture.weights, "Base weights")->delimiter(',');
  fixture_cmd->add_option("--flips", fixture.flips, "Items moved per sample");
  fixture_cmd->add_option("--size", fixture.size, "Number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    cfg.metric = parse_metric_kind(metric);
    if (*score)
      return cmd_score(cfg, out);
    if (*estimate)
      return cmd_estimate(cfg, out);
    if (*test)
      return cmd_test(cfg, out);
    if (*dpc)
      return cmd_dpc(cfg, out);
    if (*thin_cmd)
      return cmd_thin(cfg, thin, out);
    if (*certify)
      return cmd_certify(cfg, out);
    if (*demo_cmd)
      return cmd_demo(cfg, demo, demo_cmd->count("--seed") > 0, out);
    if (*random_cmd)
      return cmd_random(cfg, random, out);
    if (*fixture_cmd)
      return cmd_fixture(cfg, fixture, out);
  } catch (const Error& e) {
    err << "cbi: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "cbi: internal error: " << e.what() << '\n';
    return kInternalExit;
  }
  return kUsageExit;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  std::vector<const char*> argv{ "cbi" };
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace cbi
