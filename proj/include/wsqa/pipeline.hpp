#pragma once

#include "wsqa/learn.hpp"
#include "wsqa/synth.hpp"

namespace wsqa {

// One experiment: data source (generator config or dataset paths), the
// enumeration caps, the learning setup, and the output directory. A config
// hash ties every artifact in the run directory to this definition.
struct RunConfig {
  std::optional<GenConfig> gen;
  std::string train_path, dev_path, test_path;  // used when gen is absent
  double hard_fraction = 0.0;                   // >0: train on the hard split
  LearnConfig learn;                            // carries the EnumConfig
  std::vector<std::uint64_t> eval_seeds = {11};
  std::string out_dir = "run";
};

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what), stage_name(stage) {}
  std::string stage_name;
};

ojson run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const ojson& j);
std::string config_hash(const ojson& j);  // FNV-1a over the canonical dump

struct RunOutcome {
  std::string run_dir;
  MetricsReport test_metrics;
  double selection_task = -1.0;   // sql only
  double selection_recon = -1.0;  // sql only
};

// gen/ingest -> enum -> train -> eval (-> select-sql). Metric files contain
// no timestamps, so identical configs reproduce byte-identical outputs.
RunOutcome run_experiment(const RunConfig& cfg);

// Same data, every applicable method x seed; writes a flat CSV and returns
// the rows (method, seed, metrics).
struct CompareRow {
  std::string method;
  std::uint64_t seed = 0;
  MetricsReport test_metrics;
  double selection = -1.0;
};
std::vector<CompareRow> compare_methods(const RunConfig& cfg, const std::string& out_csv);

void write_text_file(const std::string& path, const std::string& content);
std::string format_metrics_csv(const std::vector<EpochRow>& rows);

}  // namespace wsqa
