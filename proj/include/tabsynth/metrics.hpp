#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/annotate.hpp"
#include "tabsynth/geometry.hpp"
#include "tabsynth/serialization.hpp"

namespace tabsynth {

/// Ordered labeled tree of a table: table / thead / tbody / tfoot / tr /
/// td / th. Cell nodes are leaves carrying spans and text.
struct TableTree {
  std::string tag;
  int row_span = 1;
  int col_span = 1;
  std::string text;
  std::vector<TableTree> children;

  bool is_cell() const { return tag == "td" || tag == "th"; }
};

/// Parses the first <table> of `markup`. With `struct_only` all cell text is
/// dropped. Throws Errc::ParseFailure.
TableTree table_tree(std::string_view markup, bool struct_only = false);

std::size_t node_count(const TableTree& tree);

/// Levenshtein distance over code points divided by the longer length; 0
/// for two empty strings.
double normalized_edit_distance(std::string_view a, std::string_view b);

/// Substitution cost between two node labels: 1 if tags or spans differ,
/// otherwise the normalized text distance for cells in content mode, else 0.
double rename_cost(const TableTree& a, const TableTree& b, bool content);

/// Ordered tree edit distance with unit insert/delete (Zhang-Shasha).
double tree_edit_distance(const TableTree& a, const TableTree& b, bool content = true);

/// 1 - distance / max node count.
double teds(std::string_view gt, std::string_view pred, bool struct_only);

struct Detection {
  Rect box;
  double score = 1.0;
};

struct DetectionSet {
  std::vector<Detection> predictions;
  std::vector<Rect> ground_truth;
};

inline constexpr double kApIou = 0.5;

/// COCO-style AP at IoU 0.5 with 101-point interpolation.
double ap50(const DetectionSet& dets);
/// Same, pooled over several images (predictions ranked jointly).
double ap50(const std::vector<DetectionSet>& images);

/// Bucket labels of the evaluation report.
inline constexpr const char* kMergedBothBucket = "merged on rows & columns";
std::string spanning_bucket(int spanning_cells);

struct BucketScore {
  int count = 0;
  double score = 0.0;
};

struct EvalReport {
  std::string metric;
  double overall = 0.0;
  int records = 0;
  int missing = 0;  // ground-truth records without a prediction
  std::map<std::string, BucketScore> buckets;
};

json eval_report_to_json(const EvalReport& report);

/// Reads a JSON Lines file; throws Errc::ParseFailure naming the line.
std::vector<json> read_jsonl(const std::filesystem::path& path);

/// TEDS (or TEDS-Struct) per ground-truth record, predictions matched by "file".
EvalReport evaluate_teds(const std::vector<json>& gt, const std::vector<json>& pred, bool struct_only);

/// AP50 of text-block boxes. A ground-truth block is the union of a cell's
/// line boxes. Predictions come from a record's "blocks" ([{"bbox","score"}])
/// or, failing that, from its cells the same way as ground truth, with an
/// optional per-cell "score".
EvalReport evaluate_ap50(const std::vector<json>& gt, const std::vector<json>& pred);

}  // namespace tabsynth
