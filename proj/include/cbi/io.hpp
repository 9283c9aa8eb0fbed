#pragma once

#include "cbi/conformal.hpp"
#include "cbi/metric.hpp"
#include "cbi/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cbi {

// Header-free CSV, one sample per row. Reals are written with 17 significant
// digits so that reading back reproduces every double exactly.

enum class SampleFormat
{
  partition_csv,
  vector_csv,
  distance_csv
};

struct SampleFile
{
  SampleFormat format = SampleFormat::partition_csv;
  std::filesystem::path path;
  bool header = false; // skip the first line
};

/// Parsed sample file. For distance_csv the parameters are SampleIndex 0..T-1
/// and `distances` holds the validated matrix.
struct SampleData
{
  std::vector<Parameter> parameters;
  std::shared_ptr<const DistanceMatrix> distances;
  std::size_t row_count = 0;
  std::size_t column_count = 0;

  /// Metric matching this data: precomputed for distance files, otherwise `kind`.
  MetricSpec metric(MetricKind kind) const;
};

std::string format_real(double value);
std::int64_t parse_integer(std::string_view cell, std::size_t line);
double parse_real(std::string_view cell, std::size_t line);
std::vector<std::string_view> split_csv_line(std::string_view line);

std::vector<Partition> read_partitions_csv(std::istream& in, bool header = false);
std::vector<RealVector> read_vectors_csv(std::istream& in, bool header = false);
/// Throws Error(ValidationError) if the matrix is not square, symmetric within
/// 1e-12, non-negative, with a zero diagonal.
DistanceMatrix read_distance_csv(std::istream& in, bool header = false);

void write_partitions_csv(std::ostream& out, std::span<const Partition> partitions);
void write_vectors_csv(std::ostream& out, std::span<const RealVector> vectors);
void write_distance_csv(std::ostream& out, const DistanceMatrix& matrix);

/// Throws Error(IOError) if the file cannot be opened, FormatError(line) for
/// malformed rows and Error(ValidationError) for invalid distance matrices.
SampleData load_samples(const SampleFile& file);
/// Writes partitions, real vectors, or sample indices (as a 1-column file).
void save_parameters(const std::filesystem::path& path, std::span<const Parameter> parameters);

SampleFormat sample_format_for(MetricKind kind) noexcept;

/// Splits `items` into training and calibration parts. A prefix split keeps
/// order; a fraction split shuffles with `split.seed` first and uses
/// S = round(fraction * T). Throws Error(InvalidSplit) unless 1 <= S < T.
SampleSet split_samples(std::vector<Parameter> items, const SplitSpec& split);

// Score-table files carry the split and scoring settings so that downstream
// stages can rebuild the sample set without rescoring.
struct ScoreFile
{
  ScoreTable table;
  SplitSpec split;
  MetricKind metric = MetricKind::vi_partition;
  std::size_t total_samples = 0;
};

void write_score_file(const std::filesystem::path& path, const ScoreFile& file);
ScoreFile read_score_file(const std::filesystem::path& path);

// JSON records with keys equal to the struct field names.
std::string to_json(const ConformalReport& report);
std::string to_json(const BallReport& report);
std::string to_json(const ConcentrationCertificate& certificate);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

} // namespace cbi
