#include "tabsynth/metrics.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "tabsynth/error.hpp"
#include "tabsynth/ingest.hpp"
#include "tabsynth/markup.hpp"
#include "tabsynth/text.hpp"

namespace tabsynth {

namespace {

const markup::Node* find_table(const markup::Node& n) {
  if (n.tag == "table") return &n;
  for (const auto& c : n.children) {
    if (const auto* t = find_table(c)) return t;
  }
  return nullptr;
}

TableTree build(const markup::Node& n, bool struct_only) {
  TableTree t;
  t.tag = n.tag;
  if (t.is_cell()) {
    t.row_span = markup::span_attr(n, "rowspan");
    t.col_span = markup::span_attr(n, "colspan");
    if (!struct_only) t.text = text::join_tokens(text::content_tokens(markup::cell_lines(n)));
    return t;
  }
  for (const auto& c : n.children) {
    if (c.is_text()) continue;
    const bool keep = t.tag == "tr" ? (c.tag == "td" || c.tag == "th")
                                    : (c.tag == "tr" || c.tag == "thead" || c.tag == "tbody" || c.tag == "tfoot");
    if (keep) t.children.push_back(build(c, struct_only));
  }
  return t;
}

struct Flat {
  std::vector<const TableTree*> nodes;  // postorder, 1-based (index 0 unused)
  std::vector<int> lmd;                 // leftmost leaf descendant
  std::vector<int> keyroots;
};

int flatten(const TableTree& t, Flat& f) {
  int leftmost = -1;
  for (const auto& c : t.children) {
    const int l = flatten(c, f);
    if (leftmost < 0) leftmost = l;
  }
  f.nodes.push_back(&t);
  const int self = static_cast<int>(f.nodes.size()) - 1;
  f.lmd.push_back(leftmost < 0 ? self : leftmost);
  return f.lmd.back();
}

Flat flatten(const TableTree& t) {
  Flat f;
  f.nodes.push_back(nullptr);
  f.lmd.push_back(0);
  flatten(t, f);
  const int n = static_cast<int>(f.nodes.size()) - 1;
  std::vector<int> highest(n + 1, 0);
  for (int i = 1; i <= n; ++i) highest[f.lmd[i]] = i;
  for (int i = 1; i <= n; ++i) {
    if (highest[f.lmd[i]] == i) f.keyroots.push_back(i);
  }
  return f;
}

}  // namespace

TableTree table_tree(std::string_view source, bool struct_only) {
  try {
    const markup::Node root = markup::parse(source);
    const markup::Node* table = find_table(root);
    if (!table) throw Error(Errc::ParseFailure, "no <table> element");
    return build(*table, struct_only);
  } catch (const Error& e) {
    if (e.code() == Errc::ParseFailure) throw;
    throw Error(Errc::ParseFailure, e.what());
  }
}

std::size_t node_count(const TableTree& tree) {
  std::size_t n = 1;
  for (const auto& c : tree.children) n += node_count(c);
  return n;
}

double normalized_edit_distance(std::string_view a_utf8, std::string_view b_utf8) {
  const std::u32string a = text::decode_utf8(a_utf8);
  const std::u32string b = text::decode_utf8(b_utf8);
  if (a.empty() && b.empty()) return 0.0;
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return double(prev[b.size()]) / double(std::max(a.size(), b.size()));
}

double rename_cost(const TableTree& a, const TableTree& b, bool content) {
  if (a.tag != b.tag || a.row_span != b.row_span || a.col_span != b.col_span) return 1.0;
  if (content && a.is_cell()) return normalized_edit_distance(a.text, b.text);
  return 0.0;
}

double tree_edit_distance(const TableTree& a, const TableTree& b, bool content) {
  const Flat fa = flatten(a);
  const Flat fb = flatten(b);
  const int n = static_cast<int>(fa.nodes.size()) - 1;
  const int m = static_cast<int>(fb.nodes.size()) - 1;
  Eigen::MatrixXd td = Eigen::MatrixXd::Zero(n + 1, m + 1);
  Eigen::MatrixXd fd;

  for (int i : fa.keyroots) {
    for (int j : fb.keyroots) {
      const int li = fa.lmd[i], lj = fb.lmd[j];
      fd.setZero(i - li + 2, j - lj + 2);
      for (int x = li; x <= i; ++x) fd(x - li + 1, 0) = fd(x - li, 0) + 1.0;
      for (int y = lj; y <= j; ++y) fd(0, y - lj + 1) = fd(0, y - lj) + 1.0;
      for (int x = li; x <= i; ++x) {
        for (int y = lj; y <= j; ++y) {
          const int xi = x - li + 1, yj = y - lj + 1;
          const double del = fd(xi - 1, yj) + 1.0;
          const double ins = fd(xi, yj - 1) + 1.0;
          if (fa.lmd[x] == li && fb.lmd[y] == lj) {
            fd(xi, yj) = std::min({del, ins, fd(xi - 1, yj - 1) + rename_cost(*fa.nodes[x], *fb.nodes[y], content)});
            td(x, y) = fd(xi, yj);
          } else {
            fd(xi, yj) = std::min({del, ins, fd(fa.lmd[x] - li, fb.lmd[y] - lj) + td(x, y)});
          }
        }
      }
    }
  }
  return td(n, m);
}

double teds(std::string_view gt, std::string_view pred, bool struct_only) {
  const TableTree a = table_tree(gt, struct_only);
  const TableTree b = table_tree(pred, struct_only);
  const double d = tree_edit_distance(a, b, !struct_only);
  const double denom = double(std::max(node_count(a), node_count(b)));
  return std::clamp(1.0 - d / denom, 0.0, 1.0);
}

double ap50(const DetectionSet& dets) { return ap50(std::vector<DetectionSet>{dets}); }

double ap50(const std::vector<DetectionSet>& images) {
  struct Ranked {
    double score;
    std::size_t image;
    std::size_t pred;
  };
  std::vector<Ranked> ranked;
  std::size_t n_gt = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    n_gt += images[i].ground_truth.size();
    for (std::size_t p = 0; p < images[i].predictions.size(); ++p) {
      ranked.push_back({images[i].predictions[p].score, i, p});
    }
  }
  if (n_gt == 0) return ranked.empty() ? 1.0 : 0.0;
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<std::vector<bool>> used(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) used[i].assign(images[i].ground_truth.size(), false);
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& img = images[ranked[k].image];
    const Rect& box = img.predictions[ranked[k].pred].box;
    double best = kApIou;
    int match = -1;
    for (std::size_t g = 0; g < img.ground_truth.size(); ++g) {
      if (used[ranked[k].image][g]) continue;
      const double v = iou(box, img.ground_truth[g]);
      if (v >= best) {
        if (match < 0 || v > best) match = static_cast<int>(g);
        best = v;
      }
    }
    if (match >= 0) {
      used[ranked[k].image][match] = true;
      ++tp;
    }
    precision.push_back(double(tp) / double(k + 1));
    recall.push_back(double(tp) / double(n_gt));
  }
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double thr = r / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), thr);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

std::string spanning_bucket(int spanning_cells) {
  return spanning_cells >= 4 ? "4+" : std::to_string(std::max(0, spanning_cells));
}

json eval_report_to_json(const EvalReport& r) {
  json buckets = json::object();
  for (const char* key : {"0", "1", "2", "3", "4+", kMergedBothBucket}) {
    auto it = r.buckets.find(key);
    const BucketScore b = it == r.buckets.end() ? BucketScore{} : it->second;
    buckets[key] = json{{"count", b.count}, {"score", b.score}};
  }
  return json{{"metric", r.metric}, {"overall", r.overall}, {"records", r.records}, {"missing", r.missing},
              {"buckets", std::move(buckets)}};
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseFailure, path.string() + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

struct GtInfo {
  std::string spanning;
  bool merged_both = false;
};

GtInfo gt_info(const AnnotationRecord& rec, const json& raw) {
  const SourceTable t = parse_markup_table(record_markup(rec, false));
  GtInfo info;
  bool rows = false, cols = false;
  for (const auto& c : t.grid.cells()) {
    rows = rows || c.row_span > 1;
    cols = cols || c.col_span > 1;
  }
  info.merged_both = rows && cols;
  const bool has_count = raw.contains("meta") && raw.at("meta").contains("spanningCellCount");
  info.spanning = spanning_bucket(has_count ? rec.meta.spanning_cell_count : spanning_cell_count(t.grid));
  return info;
}

std::unordered_map<std::string, const json*> index_by_file(const std::vector<json>& records) {
  std::unordered_map<std::string, const json*> out;
  for (const auto& r : records) out.emplace(r.value("file", std::string()), &r);
  return out;
}

Rect block_of(const CellAnnotation& c) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& l : c.lines) {
    x0 = std::min(x0, double(l[0]));
    y0 = std::min(y0, double(l[1]));
    x1 = std::max(x1, double(l[0] + l[2]));
    y1 = std::max(y1, double(l[1] + l[3]));
  }
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

std::vector<Detection> predictions_of(const json& raw) {
  std::vector<Detection> out;
  try {
    if (raw.contains("blocks")) {
      for (const auto& b : raw.at("blocks")) {
        const auto v = b.at("bbox").get<std::vector<double>>();
        if (v.size() != 4) throw Error(Errc::ParseFailure, "block bbox must be [x,y,w,h]");
        out.push_back({Rect{v[0], v[1], v[2], v[3]}, b.value("score", 1.0)});
      }
      return out;
    }
    for (const auto& c : raw.value("cells", json::array())) {
      std::vector<IntBox> lines;
      for (const auto& l : c.value("lines", json::array())) {
        const auto v = l.get<std::vector<long>>();
        if (v.size() != 4) throw Error(Errc::ParseFailure, "line box must be [x,y,w,h]");
        lines.push_back({v[0], v[1], v[2], v[3]});
      }
      if (lines.empty()) continue;
      CellAnnotation ca;
      ca.lines = std::move(lines);
      out.push_back({block_of(ca), c.value("score", 1.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, std::string("prediction record: ") + e.what());
  }
  return out;
}

void finish(EvalReport& r, const std::map<std::string, std::vector<double>>& per_bucket, double overall) {
  r.overall = overall;
  for (const auto& [k, v] : per_bucket) {
    BucketScore b;
    b.count = static_cast<int>(v.size());
    b.score = v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    r.buckets[k] = b;
  }
}

}  // namespace

EvalReport evaluate_teds(const std::vector<json>& gt, const std::vector<json>& pred, bool struct_only) {
  const auto preds = index_by_file(pred);
  EvalReport report;
  report.metric = struct_only ? "teds-struct" : "teds";
  std::map<std::string, std::vector<double>> per_bucket;
  double total = 0.0;
  for (const auto& raw : gt) {
    const AnnotationRecord rec = annotation_from_json(raw);
    const GtInfo info = gt_info(rec, raw);
    double score = 0.0;
    auto it = preds.find(rec.image_file);
    if (it == preds.end()) {
      ++report.missing;
    } else {
      const json& p = *it->second;
      const std::string pm = p.contains("html") ? p.at("html").get<std::string>()
                                                : record_markup(annotation_from_json(p), !struct_only);
      score = teds(record_markup(rec, !struct_only), pm, struct_only);
    }
    ++report.records;
    total += score;
    per_bucket[info.spanning].push_back(score);
    if (info.merged_both) per_bucket[kMergedBothBucket].push_back(score);
  }
  finish(report, per_bucket, report.records ? total / report.records : 0.0);
  return report;
}

EvalReport evaluate_ap50(const std::vector<json>& gt, const std::vector<json>& pred) {
  const auto preds = index_by_file(pred);
  EvalReport report;
  report.metric = "ap50";
  std::vector<DetectionSet> all;
  std::map<std::string, std::vector<DetectionSet>> sets;
  for (const auto& raw : gt) {
    const AnnotationRecord rec = annotation_from_json(raw);
    const GtInfo info = gt_info(rec, raw);
    DetectionSet ds;
    for (const auto& c : rec.cells) {
      if (!c.lines.empty()) ds.ground_truth.push_back(block_of(c));
    }
    auto it = preds.find(rec.image_file);
    if (it == preds.end()) ++report.missing;
    else ds.predictions = predictions_of(*it->second);
    ++report.records;
    sets[info.spanning].push_back(ds);
    if (info.merged_both) sets[kMergedBothBucket].push_back(ds);
    all.push_back(std::move(ds));
  }
  report.overall = all.empty() ? 0.0 : ap50(all);
  for (const auto& [k, v] : sets) report.buckets[k] = BucketScore{static_cast<int>(v.size()), ap50(v)};
  return report;
}

}  // namespace tabsynth
