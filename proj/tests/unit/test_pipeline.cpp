#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "../support/generators.hpp"
#include "tabsynth/annotate.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/pipeline.hpp"

using namespace tabsynth;
namespace fs = std::filesystem;

namespace {

const Distribution kComplexHeavy{0.4944, 0.0404, 0.1323, 0.1476, 0.1853};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("tabsynth_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;
}

std::vector<SourceTable> write_pool(const fs::path& file, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SourceTable> pool;
  std::ofstream f(file);
  for (std::size_t i = 0; i < n; ++i) {
    testing::GridOptions opt;
    opt.max_rows = 6;
    opt.max_cols = 5;
    opt.span_prob = rng.uniform(0.0, 0.4);
    const TableGrid g = testing::random_grid(rng, opt);
    const CellContent c = testing::random_content(rng, g);
    f << table_to_json(g, c).dump() << "\n";
    pool.push_back(make_source_table(g, c));
  }
  return pool;
}

PipelineConfig base_config(const fs::path& pool, const fs::path& out) {
  PipelineConfig cfg;
  cfg.sources = {{pool, SourceFormat::TableJsonl}};
  cfg.categories = fs::path(TABSYNTH_DATA_DIR) / "categories.json";
  cfg.output_dir = out;
  cfg.dataset_id = "t";
  cfg.master_seed = 99;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("largest remainder counts") {
  CHECK(largest_remainder(kComplexHeavy, 10000) == BucketCounts{4944, 404, 1323, 1476, 1853});
  const BucketCounts big = largest_remainder(kComplexHeavy, 105600);
  std::size_t sum = 0;
  for (auto c : big) sum += c;
  CHECK(sum == 105600);
  CHECK(largest_remainder(kComplexHeavy, 0) == BucketCounts{0, 0, 0, 0, 0});
}

TEST_CASE("stratified sampling") {
  std::vector<int> buckets;
  for (int b = 0; b < kBucketCount; ++b) buckets.insert(buckets.end(), 6000, b);
  Rng rng(1);
  const auto idx = stratified_sample_indices(buckets, kComplexHeavy, 10000, rng);
  BucketCounts got{};
  for (auto i : idx) ++got[buckets[i]];
  CHECK(got == BucketCounts{4944, 404, 1323, 1476, 1853});
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == idx.size());

  Rng again(1);
  CHECK(stratified_sample_indices(buckets, kComplexHeavy, 10000, again) == idx);
  CHECK(stratified_sample_indices(buckets, kComplexHeavy, 0, rng).empty());

  std::vector<int> short_pool(6000, 0);
  short_pool.insert(short_pool.end(), 3, 1);
  for (int b = 2; b < kBucketCount; ++b) short_pool.insert(short_pool.end(), 6000, b);
  try {
    stratified_sample_indices(short_pool, kComplexHeavy, 10000, rng);
    FAIL("expected InsufficientPool");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InsufficientPool);
    CHECK(std::string(e.what()).find("\"1\"") != std::string::npos);
  }
}

TEST_CASE("distribution_from_json validation") {
  CHECK(distribution_from_json(json::parse(R"({"0":0.5,"1":0.1,"2":0.1,"3":0.1,"4+":0.2})"))[4] == 0.2);
  CHECK(error_of([] { distribution_from_json(json::parse(R"({"0":0.5,"1":0.1,"2":0.1,"3":0.1,"4+":0.1})")); }) ==
        Errc::ConfigError);
  CHECK(error_of([] { distribution_from_json(json::parse(R"({"0":1.1,"1":-0.1,"2":0,"3":0,"4+":0})")); }) ==
        Errc::ConfigError);
}

TEST_CASE("dataset_stats") {
  TempDir dir("stats");
  const fs::path file = dir.path / "a.jsonl";
  {
    std::ofstream f(file);
    for (int s : {0, 0, 2, 7}) f << json{{"file", "x"}, {"meta", {{"spanningCellCount", s}, {"bordered", s == 0}}}}.dump() << "\n";
  }
  const DatasetStats st = dataset_stats(file);
  CHECK(st.total == 4);
  CHECK(st.percentages == std::array<double, kBucketCount>{50, 0, 25, 0, 25});
  CHECK(st.bordered == 2);
  CHECK(st.borderless == 2);

  const fs::path empty = dir.path / "empty.jsonl";
  std::ofstream(empty).close();
  const DatasetStats z = dataset_stats(empty);
  CHECK(z.total == 0);
  CHECK(z.counts == BucketCounts{0, 0, 0, 0, 0});
  CHECK(z.percentages == std::array<double, kBucketCount>{0, 0, 0, 0, 0});

  const fs::path bad = dir.path / "bad.jsonl";
  {
    std::ofstream f(bad);
    f << "{\"meta\":{\"spanningCellCount\":1}}\nnot json\n";
  }
  CHECK(error_of([&] { dataset_stats(bad); }) == Errc::ParseFailure);
}

TEST_CASE("config parsing rejects bad values") {
  CHECK(error_of([] { config_from_json(json::parse(R"({"sources":[],"retainFraction":1.5})"), "."); }) ==
        Errc::ConfigError);
  CHECK(error_of([] { config_from_json(json::parse(R"({"sources":[{"path":"x","format":"pdf"}]})"), "."); }) ==
        Errc::ConfigError);
  const PipelineConfig ok = config_from_json(
      json::parse(R"({"sources":[{"path":"p.jsonl"}],"retainFraction":1,"fanOut":3,"sampling":{"n":10,"distribution":{"0":1,"1":0,"2":0,"3":0,"4+":0}}})"),
      "/base");
  CHECK(ok.fan_out == 3);
  CHECK(ok.sources[0].path == fs::path("/base/p.jsonl"));
  CHECK(*ok.sample_size == 10);
}

TEST_CASE("retained tables keep their structure") {
  TempDir dir("retain");
  const auto pool = write_pool(dir.path / "pool.jsonl", 40, 5);
  PipelineConfig cfg = base_config(dir.path / "pool.jsonl", dir.path / "out");
  cfg.retain_fraction = 1.0;
  cfg.fan_out = 2;
  const RunResult r = run_pipeline(cfg);
  CHECK(r.failures == 0);
  CHECK(r.records == 80);
  for (const auto& j : read_jsonl(cfg.output_dir / "annotations.jsonl")) {
    const AnnotationRecord rec = annotation_from_json(j);
    CHECK(rec.meta.retained);
    const SourceTable& src = pool[rec.meta.index / 2];
    CHECK(teds(emit_structure_markup(src.grid, src.content), record_markup(rec, false), true) == 1.0);
    CHECK(fs::exists(cfg.output_dir / "images" / rec.image_file));
  }
}

TEST_CASE("sampled run conserves the requested bucket counts") {
  TempDir dir("conserve");
  const auto pool = write_pool(dir.path / "pool.jsonl", 300, 6);
  std::vector<int> buckets;
  for (const auto& t : pool) buckets.push_back(bucket_of(spanning_cell_count(t.grid)));
  BucketCounts supply{};
  for (int b : buckets) ++supply[b];
  for (auto s : supply) REQUIRE(s >= 8);

  PipelineConfig cfg = base_config(dir.path / "pool.jsonl", dir.path / "out");
  cfg.retain_fraction = 1.0;
  cfg.distribution = Distribution{0.4, 0.15, 0.15, 0.1, 0.2};
  cfg.sample_size = 40;
  cfg.fan_out = 3;
  const RunResult r = run_pipeline(cfg);
  CHECK(r.records + r.failures == 120);
  const BucketCounts want = largest_remainder(*cfg.distribution, 40);
  for (int b = 0; b < kBucketCount; ++b) CHECK(r.stats.counts[b] == want[b] * 3);
  const DatasetStats from_file = dataset_stats(cfg.output_dir / "annotations.jsonl");
  CHECK(from_file.counts == r.stats.counts);
}

TEST_CASE("restyling with borderless profiles only yields borderless tables") {
  TempDir dir("borderless");
  write_pool(dir.path / "pool.jsonl", 30, 7);
  const fs::path profiles = fs::path(TABSYNTH_DATA_DIR) / "profiles";
  json cats = json::array();
  cats.push_back({{"id", "only"},
                  {"keywords", json::array()},
                  {"fallback", true},
                  {"profiles",
                   {(profiles / "borderless-open.json").string(), (profiles / "borderless-three-line.json").string(),
                    (profiles / "borderless-dashed.json").string()}}});
  {
    std::ofstream f(dir.path / "cats.json");
    f << cats.dump();
  }
  PipelineConfig cfg = base_config(dir.path / "pool.jsonl", dir.path / "out");
  cfg.categories = dir.path / "cats.json";
  cfg.retain_fraction = 0.0;
  const RunResult r = run_pipeline(cfg);
  CHECK(r.records == 30);
  CHECK(r.stats.borderless == 30);
  for (const auto& j : read_jsonl(cfg.output_dir / "annotations.jsonl")) {
    const AnnotationRecord rec = annotation_from_json(j);
    CHECK_FALSE(rec.meta.bordered);
    CHECK_FALSE(rec.meta.retained);
    CHECK(rec.meta.profile_id.rfind("borderless", 0) == 0);
  }
}

TEST_CASE("runs are reproducible across worker counts") {
  TempDir dir("determinism");
  write_pool(dir.path / "pool.jsonl", 25, 8);
  PipelineConfig a = base_config(dir.path / "pool.jsonl", dir.path / "a");
  a.fan_out = 2;
  a.workers = 1;
  PipelineConfig b = a;
  b.output_dir = dir.path / "b";
  b.workers = 3;
  run_pipeline(a);
  run_pipeline(b);
  CHECK(slurp(a.output_dir / "annotations.jsonl") == slurp(b.output_dir / "annotations.jsonl"));
  std::size_t images = 0;
  for (const auto& e : fs::directory_iterator(a.output_dir / "images")) {
    CHECK(slurp(e.path()) == slurp(b.output_dir / "images" / e.path().filename()));
    ++images;
  }
  CHECK(images == 50);

  PipelineConfig c = a;
  c.output_dir = dir.path / "c";
  c.master_seed = 100;
  run_pipeline(c);
  CHECK(slurp(a.output_dir / "annotations.jsonl") != slurp(c.output_dir / "annotations.jsonl"));
}

TEST_CASE("unreadable sources are logged, not fatal") {
  TempDir dir("ingestfail");
  fs::create_directories(dir.path / "markup");
  {
    std::ofstream(dir.path / "markup" / "a.html") << "<table><tr><td>a</td></tr></table>";
    std::ofstream(dir.path / "markup" / "b.html") << "<table><tr><td>a</tr></table>";
  }
  PipelineConfig cfg = base_config(dir.path / "markup", dir.path / "out");
  cfg.sources[0].format = SourceFormat::Markup;
  const RunResult r = run_pipeline(cfg);
  CHECK(r.records == 1);
  CHECK(r.failures == 1);
  const auto manifest = read_jsonl(cfg.output_dir / "failures.jsonl");
  REQUIRE(manifest.size() == 1);
  CHECK(manifest[0]["index"].is_null());
  CHECK(manifest[0]["stage"] == "ingest");
}
