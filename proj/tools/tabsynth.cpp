// tabsynth: synthesize, sample, evaluate and inspect table recognition data.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "tabsynth/annotate.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/ingest.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/pipeline.hpp"
#include "tabsynth/serialization.hpp"
#include "tabsynth/styling.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

using namespace tabsynth;

int cmd_synth(const std::string& config_path, std::uint64_t seed, const std::string& out, int workers,
              bool fail_fast) {
  PipelineConfig cfg = load_config(config_path);
  cfg.master_seed = seed;
  cfg.output_dir = out;
  if (workers > 0) cfg.workers = workers;
  cfg.fail_fast = fail_fast;
  const RunResult r = run_pipeline(cfg);
  json summary = stats_to_json(r.stats);
  summary["records"] = r.records;
  summary["failures"] = r.failures;
  std::cout << summary.dump(2) << "\n";
  if (r.failures > 0) {
    std::cerr << r.failures << " failure(s) recorded in " << (cfg.output_dir / "failures.jsonl").string() << "\n";
  }
  return fail_fast && r.failures > 0 ? kExitFailure : 0;
}

int cmd_sample(const std::string& pool_path, const std::string& dist_path, std::size_t n, std::uint64_t seed) {
  Distribution dist;
  try {
    dist = distribution_from_json(read_json_file(dist_path));
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  const auto pool = read_table_jsonl(pool_path);
  Rng rng(seed);
  for (const auto& t : stratified_sample(pool, dist, n, rng)) {
    std::cout << table_to_json(t.grid, t.content).dump() << "\n";
  }
  return 0;
}

int cmd_infer(const std::string& lines_path, double tol) {
  const LineInput in = line_input_from_json(read_json_file(lines_path));
  const InferredTable inf = infer_table_from_lines(in.lines, in.texts, tol);
  json out = table_to_json(inf.table.grid, inf.table.content);
  out["markup"] = emit_structure_markup(inf.table.grid, inf.table.content);
  try {
    out["style"] = profile_to_json(extract_style_profile(in.texts, in.lines, inf.table.grid, inf.boundaries));
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientEvidence) throw;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table recognition data synthesis"};
  app.require_subcommand(1);

  std::string config, out = "out", pool, dist, gt, pred, lines, stats_path;
  std::uint64_t seed = 0;
  int workers = 0;
  bool fail_fast = false, struct_only = false;
  std::size_t n = 0;
  double tol = 2.0;

  auto* synth = app.add_subcommand("synth", "Synthesize an annotated dataset");
  synth->add_option("--config", config, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "Master seed")->required();
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  synth->add_flag("--fail-fast", fail_fast, "Stop at the first failed table");

  auto* sample = app.add_subcommand("sample", "Stratified sample of a table pool (JSONL to stdout)");
  sample->add_option("--pool", pool, "Table JSONL")->required()->check(CLI::ExistingFile);
  sample->add_option("--dist", dist, "Bucket fractions JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("-n", n, "Sample size")->required();
  sample->add_option("--seed", seed, "Seed")->required();

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->require_subcommand(1);
  auto* teds_cmd = eval->add_subcommand("teds", "TEDS / TEDS-Struct");
  auto* ap_cmd = eval->add_subcommand("ap50", "Text block AP at IoU 0.5");
  for (auto* c : {teds_cmd, ap_cmd}) {
    c->add_option("--gt", gt, "Ground-truth annotation JSONL")->required()->check(CLI::ExistingFile);
    c->add_option("--pred", pred, "Prediction JSONL")->required()->check(CLI::ExistingFile);
  }
  teds_cmd->add_flag("--struct-only", struct_only, "Ignore cell content");

  auto* stats = app.add_subcommand("stats", "Spanning-cell distribution of an annotation file");
  stats->add_option("annotations", stats_path, "Annotation JSONL")->required()->check(CLI::ExistingFile);

  auto* infer = app.add_subcommand("infer-grid", "Recover a table from ruling lines and text");
  infer->add_option("--lines", lines, "Line/text JSON")->required()->check(CLI::ExistingFile);
  infer->add_option("--tol", tol, "Snapping tolerance in px")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(config, seed, out, workers, fail_fast);
    if (*sample) return cmd_sample(pool, dist, n, seed);
    if (*teds_cmd) {
      std::cout << eval_report_to_json(evaluate_teds(read_jsonl(gt), read_jsonl(pred), struct_only)).dump(2) << "\n";
      return 0;
    }
    if (*ap_cmd) {
      std::cout << eval_report_to_json(evaluate_ap50(read_jsonl(gt), read_jsonl(pred))).dump(2) << "\n";
      return 0;
    }
    if (*stats) {
      std::cout << stats_to_json(dataset_stats(stats_path)).dump(2) << "\n";
      return 0;
    }
    if (*infer) return cmd_infer(lines, tol);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
