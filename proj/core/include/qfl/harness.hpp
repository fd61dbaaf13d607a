#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qfl/fedcore.hpp"
#include "qfl/trainers.hpp"

namespace qfl::harness {

enum class ExperimentKind { MCSD, MCMD };

// One dataset entry of a run configuration. MCSD runs carry a single entry
// shared by all clients; MCMD runs carry one entry per client.
struct DatasetSpec {
  std::string source;       // "moons" | "fashion_mnist" | "pneumonia_mnist"
  int class_a = -1;         // fashion_mnist pair
  int class_b = -1;
  int features = 0;         // embedded feature count for the client
  std::size_t samples = 3000;  // moons
  double noise = 0.1;          // moons

  std::string label() const;
};

struct RunConfig {
  std::string name;
  ExperimentKind experiment = ExperimentKind::MCSD;
  netmodel::TopologyKind topology = netmodel::TopologyKind::Star;
  std::vector<int> capacities;
  int depth = 8;
  encode::EmbeddingKind embedding = encode::EmbeddingKind::Angle;
  std::vector<DatasetSpec> datasets;
  int rounds = 30;
  int epochs_per_round = 1;
  int batch_size = 16;
  std::size_t samples_per_epoch = 0;  // 0 = full shard
  double learning_rate = 0.01;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string data_dir = "data";
  std::string out_dir = "out";
  fedcore::WeightAlignment alignment = fedcore::WeightAlignment::FlatPrefix;
  bool with_baselines = true;

  int num_clients() const { return static_cast<int>(capacities.size()); }
  fedcore::TrainSchedule schedule() const;
  // FNV-1a over the canonical serialization, excluding data_dir/out_dir.
  std::uint64_t config_hash() const;
  std::string to_json_string() const;
};

// Parses and fully resolves a config file: defaults applied, unknown keys
// rejected, cross-field rules enforced. Throws ConfigError naming the key.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config_json(const std::string& json_text, const std::string& default_name);
void validate_config(const RunConfig& cfg);

// data_dir precedence: explicit flag > QFL_DATA_DIR > config value.
std::filesystem::path resolve_data_dir(const RunConfig& cfg,
                                       const std::optional<std::string>& flag_value);

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<fedcore::RoundMetrics> rounds;
  fedcore::FinalEvaluation final_eval;
  netmodel::LinkStats ledger_totals;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  RunConfig config;
  std::vector<std::string> task_labels;
  std::vector<RunRecord> runs;  // one per seed
  // by_task[task][seed_index]
  std::vector<std::vector<trainers::BaselineRun>> quantum_baseline;
  std::vector<std::vector<trainers::BaselineRun>> classical_baseline;
};

// Executes the configured experiment family for every seed (seeds run
// concurrently), including the quantum and classical baselines unless
// disabled. Deterministic per seed.
ExperimentResult run_experiment(const RunConfig& cfg);
ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::filesystem::path& data_dir);

// Writes one per-seed CSV per run plus aggregate CSVs (mean and population
// std across seeds) and a summary JSON. Returns the summary path.
std::filesystem::path emit_metrics_csv(const ExperimentResult& result,
                                       const std::filesystem::path& out_dir);

// Renders accuracy charts (SVG) from the aggregate CSVs referenced by the
// summary files found in out_dir: one chart per (experiment, topology) per
// train/test split. Throws UsageError when out_dir has no summaries.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir);

// Reports presence and header validity of the on-disk datasets; returns
// true when everything needed by image experiments is available.
bool datasets_check(const std::filesystem::path& data_dir, std::ostream& out);

}  // namespace qfl::harness
