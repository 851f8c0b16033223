#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/random.hpp"
#include "tabsynth/render.hpp"
#include "tabsynth/serialization.hpp"
#include "tabsynth/table_model.hpp"

namespace tabsynth {

/// Spanning-cell buckets 0, 1, 2, 3, 4+.
inline constexpr int kBucketCount = 5;
inline constexpr std::array<const char*, kBucketCount> kBucketNames{"0", "1", "2", "3", "4+"};
using Distribution = std::array<double, kBucketCount>;
using BucketCounts = std::array<std::size_t, kBucketCount>;

int bucket_of(int spanning_cells);

/// Reads {"0":f0,...,"4+":f4}; fractions must be >= 0 and sum to 1 +- 1e-9.
/// Throws Errc::ConfigError.
Distribution distribution_from_json(const json& j);

/// Per-bucket counts summing to n: floors of n*f, with the leftover handed
/// to the largest remainders (ties to the lower bucket).
BucketCounts largest_remainder(const Distribution& target, std::size_t n);

/// Indices into a pool whose tables fall in the given buckets. Exact
/// per-bucket counts, uniform without replacement inside a bucket, output
/// shuffled. Throws Errc::InsufficientPool naming the first short bucket.
std::vector<std::size_t> stratified_sample_indices(const std::vector<int>& pool_buckets, const Distribution& target,
                                                   std::size_t n, Rng& rng);

std::vector<SourceTable> stratified_sample(const std::vector<SourceTable>& pool, const Distribution& target,
                                           std::size_t n, Rng& rng);

enum class SourceFormat { TableJsonl, Markup, Lines };

struct SourceSpec {
  std::filesystem::path path;  // file, or directory read in name order
  SourceFormat format = SourceFormat::TableJsonl;
};

struct PipelineConfig {
  std::vector<SourceSpec> sources;
  std::optional<std::filesystem::path> categories;
  std::uint64_t master_seed = 0;
  double retain_fraction = 0.5;
  double perturb_max_frac = 0.1;
  int fan_out = 1;
  std::optional<Distribution> distribution;
  std::optional<std::size_t> sample_size;  // defaults to the pool size
  std::filesystem::path output_dir = "out";
  std::string dataset_id = "synth";
  RenderOptions render;
  std::string rasterizer = "box-glyph";
  std::map<std::string, std::filesystem::path> fonts;  // family -> TrueType file; "default" is the fallback
  double line_tolerance = 2.0;
  int workers = 1;
  bool fail_fast = false;
};

/// Relative paths resolve against `base_dir`. Throws Errc::ConfigError.
PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
std::vector<std::string> config_violations(const PipelineConfig& config);

std::unique_ptr<GlyphRasterizer> make_rasterizer(const PipelineConfig& config);

struct IngestFailure {
  std::string source;
  std::string error;
};

/// Reads every source table. Unreadable tables are reported, not thrown.
std::vector<SourceTable> load_sources(const PipelineConfig& config, std::vector<IngestFailure>& failures);
std::vector<SourceTable> read_table_jsonl(const std::filesystem::path& path);

struct DatasetStats {
  std::size_t total = 0;
  BucketCounts counts{};
  std::array<double, kBucketCount> percentages{};
  std::size_t bordered = 0;
  std::size_t borderless = 0;
};

json stats_to_json(const DatasetStats& stats);
DatasetStats stats_from_records(const std::vector<json>& records);
/// Stats of an annotation JSONL file. Throws Errc::ParseFailure with the line.
DatasetStats dataset_stats(const std::filesystem::path& annotations);

struct RunResult {
  DatasetStats stats;
  std::size_t records = 0;
  std::size_t failures = 0;  // manifest entries, ingest failures included
  bool aborted = false;      // fail-fast stopped the run
};

/// Synthesizes the dataset into config.output_dir: images/, annotations.jsonl,
/// failures.jsonl and stats.json. Output is independent of config.workers.
RunResult run_pipeline(const PipelineConfig& config);

}  // namespace tabsynth
