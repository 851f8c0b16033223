// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/generators.hpp"
#include "../support/ted_oracle.hpp"
#include "tabsynth/annotate.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/ingest.hpp"
#include "tabsynth/layout.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/pipeline.hpp"
#include "tabsynth/render.hpp"
#include "tabsynth/styling.hpp"

using namespace tabsynth;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tabsynth_accept_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

TableGrid without_headers(const TableGrid& g) {
  auto cells = g.cells();
  for (auto& c : cells) c.is_header = false;
  return TableGrid(g.rows(), g.cols(), cells);
}

std::vector<SourceTable> write_pool(const fs::path& file, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SourceTable> pool;
  std::ofstream f(file);
  for (std::size_t i = 0; i < n; ++i) {
    testing::GridOptions opt;
    opt.span_prob = rng.uniform(0.0, 0.35);
    const TableGrid g = testing::random_grid(rng, opt);
    const CellContent c = testing::random_content(rng, g);
    f << table_to_json(g, c).dump() << "\n";
    pool.push_back(make_source_table(g, c));
  }
  return pool;
}

PipelineConfig pool_config(const fs::path& pool, const fs::path& out, std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.sources = {{pool, SourceFormat::TableJsonl}};
  cfg.categories = fs::path(TABSYNTH_DATA_DIR) / "categories.json";
  cfg.output_dir = out;
  cfg.dataset_id = "accept";
  cfg.master_seed = seed;
  return cfg;
}

// 1. Every synthesized record keeps the structure of its source table.
Verdict structure_round_trip() {
  const fs::path dir = scratch("c1");
  const auto pool = write_pool(dir / "pool.jsonl", 1000, 101);
  PipelineConfig cfg = pool_config(dir / "pool.jsonl", dir / "out", 2024);
  const auto t0 = Clock::now();
  const RunResult run = run_pipeline(cfg);
  const double secs = seconds_since(t0);

  std::size_t exact = 0, retained = 0;
  std::set<std::string> profiles;
  const auto records = read_jsonl(cfg.output_dir / "annotations.jsonl");
  for (const auto& j : records) {
    const AnnotationRecord rec = annotation_from_json(j);
    const SourceTable& src = pool.at(rec.meta.index);
    const double s = teds(emit_structure_markup(src.grid, src.content), record_markup(rec, false), true);
    exact += s == 1.0;
    retained += rec.meta.retained;
    profiles.insert(rec.meta.profile_id);
  }
  fs::remove_all(dir);
  Verdict v;
  v.pass = records.size() == 1000 && run.failures == 0 && exact == records.size() && secs < 120.0;
  v.detail = fmt("%zu/%zu records with TEDS-Struct = 1.0, %zu failures, %zu retained, %zu profiles, %.1f s",
                 exact, records.size(), run.failures, retained, profiles.size(), secs);
  return v;
}

// 2. Rulings of fully bordered renders infer back to the grid.
Verdict bordered_reinference() {
  Rng rng(202);
  BoxGlyphRasterizer ras;
  const int margin = 8;
  int ok = 0, skipped = 0;
  std::string first_error;
  for (int k = 0; k < 500; ++k) {
    TableGrid g = testing::random_grid(rng, {.header_prob = 0});
    while (testing::is_degenerate(g)) {
      ++skipped;
      g = testing::random_grid(rng, {.header_prob = 0});
    }
    const CellContent content = testing::random_content(rng, g);
    StyleProfile p = testing::random_profile(rng, {.bordered = true});
    p = perturb_profile(p, 0.1, rng);
    const LayoutResult lay = solve_layout(g, content, p, ras.metrics());
    std::vector<LineSegment> lines;
    for (const auto& r : visible_rulings(lay, p)) {
      LineSegment s = r.segment;
      s.position += margin;
      s.start += margin;
      s.end += margin;
      lines.push_back(s);
    }
    std::vector<TextSpan> texts;
    for (const auto& c : lay.cells) {
      for (std::size_t l = 0; l < c.line_boxes.size(); ++l) {
        const Rect& b = c.line_boxes[l];
        texts.push_back({Rect{double(round_half_up(b.x + margin)), double(round_half_up(b.y + margin)),
                              double(round_half_up(b.right() + margin) - round_half_up(b.x + margin)),
                              double(round_half_up(b.bottom() + margin) - round_half_up(b.y + margin))},
                         c.lines[l], c.style.font_size});
      }
    }
    try {
      const SourceTable t = infer_grid_from_lines(lines, texts, 1.0);
      if (t.grid == g && t.content == content) ++ok;
      else if (first_error.empty()) first_error = fmt("table %d differs", k);
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  Verdict v;
  v.pass = ok == 500;
  v.detail = fmt("%d/500 grids and texts recovered cell-for-cell (%d degenerate draws redrawn)", ok, skipped);
  if (!first_error.empty()) v.detail += "; first: " + first_error;
  return v;
}

bool inside(const IntBox& a, const IntBox& b) {
  return a[0] >= b[0] && a[1] >= b[1] && a[0] + a[2] <= b[0] + b[2] && a[1] + a[3] <= b[1] + b[3];
}

long overlap(const IntBox& a, const IntBox& b) {
  const long w = std::min(a[0] + a[2], b[0] + b[2]) - std::max(a[0], b[0]);
  const long h = std::min(a[1] + a[3], b[1] + b[3]) - std::max(a[1], b[1]);
  return w > 0 && h > 0 ? w * h : 0;
}

// 3. Nesting, disjointness and tiling, before and after rounding.
Verdict geometry_invariants() {
  Rng rng(303);
  BoxGlyphRasterizer ras;
  const int margin = 8;
  int nesting = 0, overlaps = 0, tiling = 0, rounded_nesting = 0;
  std::string first;
  for (int k = 0; k < 1000; ++k) {
    const TableGrid g = testing::random_grid(rng);
    const CellContent content = testing::random_content(rng, g);
    const StyleProfile p = perturb_profile(testing::random_profile(rng), 0.1, rng);
    const LayoutResult lay = solve_layout(g, content, p, ras.metrics());
    const std::string nv = testing::nesting_violation(lay);
    if (!nv.empty()) {
      ++nesting;
      if (first.empty()) first = nv;
    }
    const auto [w, h] = canvas_size(lay, {});
    AnnotationMeta meta;
    meta.width = w;
    meta.height = h;
    AnnotationRecord rec;
    try {
      rec = emit_annotation(lay, g, content, meta, "x.png", margin);
    } catch (const Error& e) {
      ++rounded_nesting;
      if (first.empty()) first = e.what();
      continue;
    }
    const IntBox table{margin, margin, w - 2 * margin, h - 2 * margin};
    long area = 0;
    for (std::size_t i = 0; i < rec.cells.size(); ++i) {
      const auto& c = rec.cells[i];
      area += c.bbox[2] * c.bbox[3];
      bool ok = inside(c.bbox, table);
      for (const auto& l : c.lines) ok = ok && inside(l, c.bbox);
      rounded_nesting += !ok;
      for (std::size_t j = i + 1; j < rec.cells.size(); ++j) overlaps += overlap(c.bbox, rec.cells[j].bbox) > 0;
    }
    tiling += area != table[2] * table[3];
  }
  Verdict v;
  v.pass = nesting + overlaps + tiling + rounded_nesting == 0;
  v.detail = fmt("1000 tables: %d nesting, %d rounded nesting, %d interior overlaps, %d tiling violations", nesting,
                 rounded_nesting, overlaps, tiling);
  if (!first.empty()) v.detail += "; first: " + first;
  return v;
}

// 4. Tree edit distance against exhaustive search, worked metric values.
Verdict metric_oracles() {
  Rng rng(404);
  int agree = 0;
  const int pairs = 600;
  for (int k = 0; k < pairs; ++k) {
    const TableTree a = testing::random_tree(rng, 1 + static_cast<int>(rng.index(8)));
    const TableTree b = testing::random_tree(rng, 1 + static_cast<int>(rng.index(8)));
    const bool content = k % 2 == 0;
    agree += std::abs(tree_edit_distance(a, b, content) - testing::brute_force_ted(a, b, content)) <= 1e-12;
  }
  const double t1 = teds("<table><tr><td>a</td><td>b</td></tr></table>", "<table><tr><td>a</td></tr></table>", false);
  const double t2 = teds("<table><tr><td>ab</td></tr></table>", "<table><tr><td>ac</td></tr></table>", false);
  const Rect g1{0, 0, 10, 10}, g2{20, 0, 10, 10};
  const double ap = ap50(DetectionSet{{{g1, 0.9}, {Rect{50, 50, 10, 10}, 0.8}, {g2, 0.7}}, {g1, g2}});
  Verdict v;
  v.pass = agree == pairs && std::abs(t1 - 0.75) <= 1e-9 && std::abs(t2 - (1.0 - 0.5 / 3.0)) <= 1e-9 &&
           std::abs(ap - 0.8350) <= 1e-4;
  v.detail = fmt("oracle agreement %d/%d; teds %.10f and %.10f; ap50 %.6f", agree, pairs, t1, t2, ap);
  return v;
}

// 5. Largest-remainder sampling at full and desk scale.
Verdict sampling_fidelity() {
  const Distribution target{0.4944, 0.0404, 0.1323, 0.1476, 0.1853};
  const std::array<long, kBucketCount> expected{52208, 4267, 13971, 15587, 19567};
  std::vector<int> pool;
  for (int b = 0; b < kBucketCount; ++b) pool.insert(pool.end(), 60000, b);

  const auto t0 = Clock::now();
  Rng rng(505);
  BucketCounts big{};
  for (auto i : stratified_sample_indices(pool, target, 105600, rng)) ++big[pool[i]];
  BucketCounts small{};
  for (auto i : stratified_sample_indices(pool, target, 10000, rng)) ++small[pool[i]];
  const double secs = seconds_since(t0);

  bool within = true;
  double worst = 0.0;
  for (int b = 0; b < kBucketCount; ++b) {
    within = within && std::labs(static_cast<long>(big[b]) - expected[b]) <= 1;
    worst = std::max(worst, std::abs(100.0 * double(small[b]) / 10000.0 - 100.0 * target[b]));
  }
  Verdict v;
  v.pass = within && worst <= 0.01 + 1e-9 && secs < 5.0;
  v.detail = fmt("n=105600 -> %zu/%zu/%zu/%zu/%zu; n=10000 max deviation %.4f pp; %.2f s", big[0], big[1], big[2],
                 big[3], big[4], worst, secs);
  return v;
}

// 6. Perturbation stays within 10% and never touches categorical attributes.
Verdict perturbation_bound() {
  Rng gen(606);
  long numeric = 0, out_of_bound = 0, categorical = 0;
  for (int k = 0; k < 10000; ++k) {
    StyleProfile p = testing::random_profile(gen);
    StyleProfile q = perturb_profile(p, 0.1, gen);
    std::vector<double> a, b;
    for_each_numeric(p, [&](double& x) { a.push_back(x); });
    for_each_numeric(q, [&](double& x) { b.push_back(x); });
    if (a.size() != b.size()) {
      ++categorical;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++numeric;
      out_of_bound += std::abs(b[i] - a[i]) > 0.1 * a[i] + 1e-9;
    }
    for_each_numeric(p, [](double& x) { x = 0; });
    for_each_numeric(q, [](double& x) { x = 0; });
    categorical += !(p == q);
  }
  Verdict v;
  v.pass = out_of_bound == 0 && categorical == 0;
  v.detail = fmt("10000 perturbations, %ld numeric values: %ld out of bound, %ld categorical changes", numeric,
                 out_of_bound, categorical);
  return v;
}

// 7. Same config and seed, different worker counts, same bytes.
Verdict end_to_end_determinism() {
  const fs::path dir = scratch("c7");
  write_pool(dir / "pool.jsonl", 80, 707);
  PipelineConfig a = load_config(fs::path(TABSYNTH_DATA_DIR) / "samples" / "config.json");
  a.sources.push_back({dir / "pool.jsonl", SourceFormat::TableJsonl});
  a.master_seed = 7;
  a.fan_out = 2;
  a.workers = 1;
  a.output_dir = dir / "one";
  PipelineConfig b = a;
  b.workers = 4;
  b.output_dir = dir / "four";
  const RunResult ra = run_pipeline(a);
  const RunResult rb = run_pipeline(b);

  bool same = slurp(a.output_dir / "annotations.jsonl") == slurp(b.output_dir / "annotations.jsonl") &&
              slurp(a.output_dir / "failures.jsonl") == slurp(b.output_dir / "failures.jsonl");
  std::set<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a.output_dir / "images")) na.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b.output_dir / "images")) nb.insert(e.path().filename().string());
  same = same && na == nb;
  std::size_t identical = 0;
  for (const auto& n : na) {
    identical += slurp(a.output_dir / "images" / n) == slurp(b.output_dir / "images" / n);
  }
  same = same && identical == na.size();
  fs::remove_all(dir);
  Verdict v;
  v.pass = same && ra.records > 0 && ra.records == rb.records;
  v.detail = fmt("1 vs 4 workers: %zu records, %zu/%zu images byte-identical, JSONL %s", ra.records, identical,
                 na.size(), same ? "identical" : "differs");
  return v;
}

// Style-extraction generator: per-column horizontal alignment and padding,
// per-row vertical alignment and padding, full borders.
StyleProfile extraction_profile(Rng& rng, int R, int C) {
  StyleProfile p = default_profile();
  p.id = "extract-check";
  p.table.font_size = rng.uniform(8.0, 14.0);
  p.table.line_spacing = rng.uniform(0.0, 4.0);
  constexpr std::array<BlockAlign, 3> blocks{BlockAlign::Left, BlockAlign::Center, BlockAlign::Right};
  p.table.block_align = BlockAlignment{blocks[rng.index(3)], 0.0};
  constexpr std::array<HAlign, 3> hs{HAlign::Left, HAlign::Center, HAlign::Right};
  constexpr std::array<VAlign, 3> vs{VAlign::Top, VAlign::Center, VAlign::Bottom};
  p.table.h_align = HorizontalAlignment{hs[rng.index(3)], 0.0};
  p.table.v_align = VerticalAlignment{vs[rng.index(3)], 0.0};
  p.table.padding_left = rng.uniform(1.0, 8.0);
  p.table.padding_right = rng.uniform(1.0, 8.0);
  p.table.padding_top = rng.uniform(1.0, 6.0);
  p.table.padding_bottom = rng.uniform(1.0, 6.0);
  for (int c = 0; c < C; ++c) {
    if (!rng.chance(0.5)) continue;
    CellStyle s;
    s.h_align = HorizontalAlignment{hs[rng.index(3)], 0.0};
    s.padding_left = rng.uniform(1.0, 8.0);
    s.padding_right = rng.uniform(1.0, 8.0);
    p.cols[c] = s;
  }
  for (int r = 0; r < R; ++r) {
    if (!rng.chance(0.5)) continue;
    CellStyle s;
    s.v_align = VerticalAlignment{vs[rng.index(3)], 0.0};
    s.padding_top = rng.uniform(1.0, 6.0);
    s.padding_bottom = rng.uniform(1.0, 6.0);
    p.rows[r] = s;
  }
  p.outer.thickness = rng.uniform(0.8, 2.0);
  p.inner.thickness = rng.uniform(0.8, 1.5);
  return p;
}

// Alignment is only observable in a row or column whose blocks leave
// enough free space: the widest block must touch the padding (so padding
// is measurable) and the summed slack must exceed the rounding noise of
// four pixels per block.
bool observable(const TableGrid& g, const CellContent& content, const LayoutResult& lay) {
  for (int axis = 0; axis < 2; ++axis) {
    const int n = axis == 0 ? g.cols() : g.rows();
    for (int k = 0; k < n; ++k) {
      int count = 0;
      double total = 0.0, least = 1e300;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const GridCell& c = g[i];
        const bool member = axis == 0 ? (c.col == k && c.col_span == 1) : (c.row == k && c.row_span == 1);
        if (!member || content[i].empty()) continue;
        const CellLayout& cl = lay.cells[i];
        const double slack = axis == 0 ? cl.aligned_box.w - cl.block_box.w : cl.aligned_box.h - cl.block_box.h;
        ++count;
        total += slack;
        least = std::min(least, slack);
      }
      if (count < 2 || least > 0.25 || total <= 4.0 * count + 2.0) return false;
    }
  }
  return true;
}

// 8. Render-then-extract recovers alignment, padding and border modes.
Verdict style_extraction() {
  Rng rng(808);
  BoxGlyphRasterizer ras;
  const int margin = 8;
  int tables = 0, align_total = 0, align_ok = 0, pad_total = 0, pad_ok = 0, modes_ok = 0, draws = 0;
  double worst_pad = 0.0;
  std::string first;
  while (tables < 200) {
    testing::GridOptions opt;
    opt.min_rows = 2;
    opt.max_rows = 5;
    opt.min_cols = 2;
    opt.max_cols = 4;
    opt.span_prob = 0.15;
    opt.max_span = 2;
    opt.header_prob = 0;
    const TableGrid g = testing::random_recoverable_grid(rng, opt);
    const StyleProfile p = extraction_profile(rng, g.rows(), g.cols());
    testing::ContentOptions copt;
    copt.empty_prob = 0.05;
    copt.max_lines = 3;
    copt.max_words = 5;
    CellContent content;
    LayoutResult lay;
    bool found = false;
    for (int attempt = 0; attempt < 60 && !found; ++attempt) {
      ++draws;
      content = testing::random_content(rng, g, copt);
      lay = solve_layout(g, content, p, ras.metrics());
      found = observable(g, content, lay);
    }
    if (!found) continue;
    ++tables;

    std::vector<LineSegment> lines;
    for (const auto& r : visible_rulings(lay, p)) {
      LineSegment s = r.segment;
      s.position += margin;
      s.start += margin;
      s.end += margin;
      lines.push_back(s);
    }
    std::vector<TextSpan> texts;
    for (const auto& c : lay.cells) {
      for (std::size_t l = 0; l < c.line_boxes.size(); ++l) {
        const Rect& b = c.line_boxes[l];
        const long x0 = round_half_up(b.x + margin), y0 = round_half_up(b.y + margin);
        texts.push_back({Rect{double(x0), double(y0), double(round_half_up(b.right() + margin) - x0),
                              double(round_half_up(b.bottom() + margin) - y0)},
                         c.lines[l], c.style.font_size});
      }
    }
    StyleProfile got;
    try {
      const InferredTable inf = infer_table_from_lines(lines, texts, 1.0);
      got = extract_style_profile(texts, lines, inf.table.grid, inf.boundaries);
    } catch (const Error& e) {
      if (first.empty()) first = e.what();
      continue;
    }
    modes_ok += got.outer.mode == p.outer.mode && got.inner.mode == p.inner.mode;

    const int R = g.rows(), C = g.cols();
    for (int c = 0; c < C; ++c) {
      const ResolvedStyle want = resolve_style(p, 0, c, R, C);
      const ResolvedStyle have = resolve_style(got, 0, c, R, C);
      ++align_total;
      if (have.h_align.kind == want.h_align.kind) ++align_ok;
      else if (first.empty()) first = fmt("table %d column %d alignment", tables, c);
      for (auto [a, b] : {std::pair{have.padding_left, want.padding_left}, {have.padding_right, want.padding_right}}) {
        ++pad_total;
        worst_pad = std::max(worst_pad, std::abs(a - b));
        pad_ok += std::abs(a - b) <= 1.0;
      }
    }
    for (int r = 0; r < R; ++r) {
      const ResolvedStyle want = resolve_style(p, r, 0, R, C);
      const ResolvedStyle have = resolve_style(got, r, 0, R, C);
      ++align_total;
      if (have.v_align.kind == want.v_align.kind) ++align_ok;
      else if (first.empty()) first = fmt("table %d row %d alignment", tables, r);
      for (auto [a, b] : {std::pair{have.padding_top, want.padding_top}, {have.padding_bottom, want.padding_bottom}}) {
        ++pad_total;
        worst_pad = std::max(worst_pad, std::abs(a - b));
        pad_ok += std::abs(a - b) <= 1.0;
      }
    }
  }
  Verdict v;
  v.pass = align_ok == align_total && pad_ok == pad_total && modes_ok == 200;
  v.detail = fmt("200 tables (%d content draws): alignment %d/%d, padding %d/%d (worst %.2f px), border modes %d/200",
                 draws, align_ok, align_total, pad_ok, pad_total, worst_pad, modes_ok);
  if (!first.empty()) v.detail += "; first: " + first;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"1 structure round trip", structure_round_trip},
      {"2 bordered re-inference", bordered_reinference},
      {"3 geometry invariants", geometry_invariants},
      {"4 metric oracles", metric_oracles},
      {"5 sampling fidelity", sampling_fidelity},
      {"6 perturbation bound", perturbation_bound},
      {"7 end-to-end determinism", end_to_end_determinism},
      {"8 style extraction fidelity", style_extraction},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
