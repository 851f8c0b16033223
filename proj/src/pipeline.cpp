#include "tabsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "tabsynth/annotate.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/ingest.hpp"
#include "tabsynth/layout.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/styling.hpp"
#include "tabsynth/truetype.hpp"

namespace tabsynth {

namespace fs = std::filesystem;

int bucket_of(int spanning_cells) { return std::clamp(spanning_cells, 0, kBucketCount - 1); }

Distribution distribution_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "distribution must be an object keyed 0,1,2,3,4+");
  Distribution d{};
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto pos = std::find(kBucketNames.begin(), kBucketNames.end(), it.key());
    if (pos == kBucketNames.end()) throw Error(Errc::ConfigError, "unknown bucket '" + it.key() + "'");
    if (!it.value().is_number()) throw Error(Errc::ConfigError, "bucket '" + it.key() + "' is not a number");
    const double f = it.value().get<double>();
    if (!(f >= 0.0)) throw Error(Errc::ConfigError, "bucket '" + it.key() + "' is negative");
    d[static_cast<std::size_t>(pos - kBucketNames.begin())] = f;
  }
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::ConfigError, "distribution sums to " + std::to_string(sum));
  return d;
}

BucketCounts largest_remainder(const Distribution& target, std::size_t n) {
  BucketCounts counts{};
  std::array<double, kBucketCount> rem{};
  std::size_t assigned = 0;
  for (int b = 0; b < kBucketCount; ++b) {
    const double exact = target[b] * double(n);
    counts[b] = static_cast<std::size_t>(std::floor(exact));
    rem[b] = exact - std::floor(exact);
    assigned += counts[b];
  }
  std::array<int, kBucketCount> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % kBucketCount]];
  while (assigned > n) {  // only reachable when the fractions sum slightly above 1
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

std::vector<std::size_t> stratified_sample_indices(const std::vector<int>& pool_buckets, const Distribution& target,
                                                   std::size_t n, Rng& rng) {
  std::array<std::vector<std::size_t>, kBucketCount> by_bucket;
  for (std::size_t i = 0; i < pool_buckets.size(); ++i) by_bucket[bucket_of(pool_buckets[i])].push_back(i);
  const BucketCounts counts = largest_remainder(target, n);
  for (int b = 0; b < kBucketCount; ++b) {
    if (by_bucket[b].size() < counts[b]) {
      throw Error(Errc::InsufficientPool, "bucket \"" + std::string(kBucketNames[b]) + "\": need " + std::to_string(counts[b]) +
                                              ", pool has " + std::to_string(by_bucket[b].size()));
    }
  }
  std::vector<std::size_t> out;
  out.reserve(n);
  for (int b = 0; b < kBucketCount; ++b) {
    auto& v = by_bucket[b];
    for (std::size_t k = 0; k < counts[b]; ++k) {
      std::swap(v[k], v[k + rng.index(v.size() - k)]);
      out.push_back(v[k]);
    }
  }
  for (std::size_t k = out.size(); k > 1; --k) std::swap(out[k - 1], out[rng.index(k)]);
  return out;
}

std::vector<SourceTable> stratified_sample(const std::vector<SourceTable>& pool, const Distribution& target,
                                           std::size_t n, Rng& rng) {
  std::vector<int> buckets;
  buckets.reserve(pool.size());
  for (const auto& t : pool) buckets.push_back(spanning_cell_count(t.grid));
  std::vector<SourceTable> out;
  for (std::size_t i : stratified_sample_indices(buckets, target, n, rng)) out.push_back(pool[i]);
  return out;
}

namespace {

SourceFormat format_from_string(const std::string& s) {
  if (s == "table-jsonl") return SourceFormat::TableJsonl;
  if (s == "markup") return SourceFormat::Markup;
  if (s == "lines") return SourceFormat::Lines;
  throw Error(Errc::ConfigError, "unknown source format '" + s + "' (table-jsonl, markup, lines)");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw Error(Errc::ConfigError, "config must be an object");
    for (const auto& s : j.at("sources")) {
      c.sources.push_back({resolve(base_dir, s.at("path").get<std::string>()),
                           format_from_string(s.value("format", std::string("table-jsonl")))});
    }
    if (j.contains("categories")) c.categories = resolve(base_dir, j.at("categories").get<std::string>());
    c.master_seed = j.value("masterSeed", std::uint64_t{0});
    c.retain_fraction = j.value("retainFraction", 0.5);
    c.perturb_max_frac = j.value("perturbMaxFrac", 0.1);
    c.fan_out = j.value("fanOut", 1);
    if (j.contains("sampling")) {
      const json& s = j.at("sampling");
      if (s.contains("n")) c.sample_size = s.at("n").get<std::size_t>();
      if (s.contains("distribution")) c.distribution = distribution_from_json(s.at("distribution"));
    }
    if (j.contains("outputDir")) c.output_dir = resolve(base_dir, j.at("outputDir").get<std::string>());
    c.dataset_id = j.value("datasetId", c.dataset_id);
    c.render.margin = j.value("margin", c.render.margin);
    c.render.max_dimension = j.value("maxImageDim", c.render.max_dimension);
    if (j.contains("pageColor")) c.render.page = color_from_hex(j.at("pageColor").get<std::string>());
    c.rasterizer = j.value("rasterizer", c.rasterizer);
    const json fonts = j.value("fonts", json::object());
    for (const auto& [family, path] : fonts.items()) {
      c.fonts[family] = resolve(base_dir, path.get<std::string>());
    }
    c.line_tolerance = j.value("lineTolerance", c.line_tolerance);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    throw Error(Errc::ConfigError, e.what());
  }
  const auto problems = config_violations(c);
  if (!problems.empty()) throw Error(Errc::ConfigError, problems.front());
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::vector<std::string> config_violations(const PipelineConfig& c) {
  std::vector<std::string> out;
  if (c.sources.empty()) out.push_back("no sources configured");
  if (!(c.retain_fraction >= 0.0 && c.retain_fraction <= 1.0)) out.push_back("retainFraction must lie in [0,1]");
  if (!(c.perturb_max_frac >= 0.0 && c.perturb_max_frac < 1.0)) out.push_back("perturbMaxFrac must lie in [0,1)");
  if (c.fan_out < 1) out.push_back("fanOut must be at least 1");
  if (c.workers < 1) out.push_back("workers must be at least 1");
  if (c.render.margin < 0) out.push_back("margin must be non-negative");
  if (c.render.max_dimension < 1) out.push_back("maxImageDim must be positive");
  if (c.rasterizer != "box-glyph" && c.rasterizer != "real-font") {
    out.push_back("rasterizer must be box-glyph or real-font");
  }
  if (c.retain_fraction < 1.0 && !c.categories) out.push_back("restyling needs a categories file");
  if (c.distribution && !c.sample_size) out.push_back("sampling.distribution needs sampling.n");
  if (c.dataset_id.empty()) out.push_back("datasetId must not be empty");
  return out;
}

std::unique_ptr<GlyphRasterizer> make_rasterizer(const PipelineConfig& c) {
  if (c.rasterizer == "box-glyph") return std::make_unique<BoxGlyphRasterizer>();
  std::map<std::string, std::shared_ptr<const TrueTypeFont>> fonts;
  std::shared_ptr<const TrueTypeFont> fallback;
  try {
    for (const auto& [family, path] : c.fonts) {
      auto f = std::make_shared<const TrueTypeFont>(TrueTypeFont::load(path));
      if (family == "default") fallback = f;
      else fonts[family] = f;
    }
    if (!fallback) {
      fallback = fonts.empty() ? std::make_shared<const TrueTypeFont>(
                                     TrueTypeFont::load("/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf"))
                               : fonts.begin()->second;
    }
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return std::make_unique<RealFontRasterizer>(std::make_shared<const TrueTypeMetrics>(fonts, fallback));
}

std::vector<SourceTable> read_table_jsonl(const fs::path& path) {
  std::vector<SourceTable> out;
  for (const json& j : read_jsonl(path)) out.push_back(table_from_json(j));
  return out;
}

namespace {

std::vector<fs::path> files_of(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

SourceTable table_from_lines(const LineInput& in, double tol) {
  InferredTable inf = infer_table_from_lines(in.lines, in.texts, tol);
  try {
    inf.table.extracted_style = extract_style_profile(in.texts, in.lines, inf.table.grid, inf.boundaries);
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientEvidence) throw;
  }
  return std::move(inf.table);
}

}  // namespace

std::vector<SourceTable> load_sources(const PipelineConfig& config, std::vector<IngestFailure>& failures) {
  std::vector<SourceTable> out;
  for (const auto& src : config.sources) {
    if (!fs::exists(src.path)) throw Error(Errc::ConfigError, "source not found: " + src.path.string());
    for (const auto& file : files_of(src.path)) {
      if (src.format == SourceFormat::TableJsonl) {
        std::vector<json> rows;
        try {
          rows = read_jsonl(file);
        } catch (const Error& e) {
          failures.push_back({file.string(), std::string(errc_name(e.code())) + ": " + e.what()});
          continue;
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
          try {
            out.push_back(table_from_json(rows[i]));
          } catch (const Error& e) {
            failures.push_back({file.string() + ":" + std::to_string(i + 1),
                                std::string(errc_name(e.code())) + ": " + e.what()});
          }
        }
        continue;
      }
      try {
        if (src.format == SourceFormat::Markup) out.push_back(parse_markup_table(read_text_file(file)));
        else out.push_back(table_from_lines(line_input_from_json(read_json_file(file)), config.line_tolerance));
      } catch (const Error& e) {
        failures.push_back({file.string(), std::string(errc_name(e.code())) + ": " + e.what()});
      }
    }
  }
  return out;
}

json stats_to_json(const DatasetStats& s) {
  json buckets = json::object();
  for (int b = 0; b < kBucketCount; ++b) {
    buckets[kBucketNames[b]] = json{{"count", s.counts[b]}, {"percent", s.percentages[b]}};
  }
  return json{{"total", s.total}, {"buckets", std::move(buckets)}, {"bordered", s.bordered},
              {"borderless", s.borderless}};
}

DatasetStats stats_from_records(const std::vector<json>& records) {
  DatasetStats s;
  for (const auto& r : records) {
    const json meta = r.value("meta", json::object());
    if (!meta.contains("spanningCellCount")) throw Error(Errc::ParseFailure, "record lacks meta.spanningCellCount");
    ++s.counts[bucket_of(meta.at("spanningCellCount").get<int>())];
    if (meta.value("bordered", false)) ++s.bordered;
    else ++s.borderless;
    ++s.total;
  }
  for (int b = 0; b < kBucketCount; ++b) {
    s.percentages[b] = s.total ? 100.0 * double(s.counts[b]) / double(s.total) : 0.0;
  }
  return s;
}

DatasetStats dataset_stats(const fs::path& annotations) {
  const auto records = read_jsonl(annotations);
  try {
    return stats_from_records(records);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, annotations.string() + ": " + e.what());
  }
}

namespace {

struct Outcome {
  std::string record;  // one JSON line, empty on failure
  std::string stage;
  std::string error;
};

struct Job {
  const PipelineConfig& config;
  const std::vector<SourceTable>& tables;
  const std::vector<CategoryDescriptor>& categories;
  const GlyphRasterizer& rasterizer;
  fs::path image_dir;
};

Outcome synthesize(const Job& job, std::size_t index) {
  const PipelineConfig& cfg = job.config;
  const SourceTable& src = job.tables[index / static_cast<std::size_t>(cfg.fan_out)];
  const std::uint64_t seed = derive_seed(cfg.master_seed, index);
  Rng rng(seed);
  Outcome out;
  out.stage = "categorize";
  try {
    const bool retain = rng.chance(cfg.retain_fraction);
    std::string category;
    if (!job.categories.empty()) category = match_category(src.content, job.categories);
    StyleProfile profile;
    if (retain) {
      profile = src.extracted_style ? *src.extracted_style : default_profile();
    } else {
      out.stage = "style";
      profile = perturb_profile(select_profile(category, job.categories, rng), cfg.perturb_max_frac, rng);
    }
    out.stage = "layout";
    const LayoutResult layout = solve_layout(src.grid, src.content, profile, job.rasterizer.metrics());
    out.stage = "render";
    const Canvas canvas = render_table(layout, profile, job.rasterizer, cfg.render);
    const std::string file = image_file_name(cfg.dataset_id, index);
    out.stage = "annotate";
    AnnotationMeta meta;
    meta.bordered = is_fully_bordered(layout, profile);
    meta.category_id = category;
    meta.seed = seed;
    meta.index = index;
    meta.profile_id = profile.id;
    meta.retained = retain;
    meta.width = canvas.width();
    meta.height = canvas.height();
    const AnnotationRecord rec = emit_annotation(layout, src.grid, src.content, meta, file, cfg.render.margin);
    out.stage = "write";
    write_png(canvas, job.image_dir / file);
    out.record = annotation_to_json(rec).dump();
  } catch (const Error& e) {
    out.error = std::string(errc_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  for (const auto& l : lines) f << l << '\n';
  if (!f) throw Error(Errc::IoError, "short write to " + path.string());
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config) {
  const auto problems = config_violations(config);
  if (!problems.empty()) throw Error(Errc::ConfigError, problems.front());

  std::vector<CategoryDescriptor> categories;
  if (config.categories) {
    try {
      categories = load_categories(*config.categories);
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, e.what());
    }
  }
  const std::unique_ptr<GlyphRasterizer> rasterizer = make_rasterizer(config);

  std::vector<IngestFailure> ingest_failures;
  std::vector<SourceTable> pool = load_sources(config, ingest_failures);
  std::vector<std::string> manifest;
  for (const auto& f : ingest_failures) {
    manifest.push_back(json{{"index", nullptr}, {"source", f.source}, {"stage", "ingest"}, {"error", f.error}}.dump());
  }

  RunResult result;
  std::vector<SourceTable> tables;
  if (config.distribution) {
    Rng sampler(derive_seed(config.master_seed, ~std::uint64_t{0}));
    tables = stratified_sample(pool, *config.distribution, *config.sample_size, sampler);
  } else {
    tables = std::move(pool);
    if (config.sample_size && *config.sample_size < tables.size()) tables.resize(*config.sample_size);
  }

  fs::create_directories(config.output_dir / "images");
  const Job job{config, tables, categories, *rasterizer, config.output_dir / "images"};
  const std::size_t total = tables.size() * static_cast<std::size_t>(config.fan_out);
  std::vector<Outcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{config.fail_fast && !ingest_failures.empty()};
  std::vector<char> done(total, 0);

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      outcomes[i] = synthesize(job, i);
      done[i] = 1;
      if (config.fail_fast && !outcomes[i].error.empty()) stop.store(true);
    }
  };
  const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(total, 1))));
  std::vector<std::thread> threads;
  for (int w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::vector<std::string> records;
  std::vector<json> parsed;
  for (std::size_t i = 0; i < total; ++i) {
    if (!done[i]) continue;
    const Outcome& o = outcomes[i];
    if (o.error.empty()) {
      records.push_back(o.record);
      parsed.push_back(json::parse(o.record));
    } else {
      manifest.push_back(json{{"index", i}, {"stage", o.stage}, {"error", o.error}}.dump());
    }
  }
  result.aborted = stop.load();
  result.records = records.size();
  result.failures = manifest.size();
  result.stats = stats_from_records(parsed);

  write_lines(config.output_dir / "annotations.jsonl", records);
  write_lines(config.output_dir / "failures.jsonl", manifest);
  write_lines(config.output_dir / "stats.json", {stats_to_json(result.stats).dump(2)});
  return result;
}

}  // namespace tabsynth
