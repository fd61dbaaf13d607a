#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qfl/errors.hpp"
#include "qfl/harness.hpp"
#include "support/oracles.hpp"

using namespace qfl;
using harness::RunConfig;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qfl_harness_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMcsdJson = R"({
  "name": "mcsd_star",
  "experiment": "mcsd",
  "topology": "star",
  "capacities": [2, 2, 2],
  "depth": 8,
  "embedding": "angle",
  "datasets": [{"source": "moons", "samples": 3000, "noise": 0.1}]
})";

const char* kMcmdJson = R"({
  "name": "mcmd_star",
  "experiment": "mcmd",
  "topology": "star",
  "capacities": [4, 6, 10, 10],
  "depth": 10,
  "embedding": "amplitude",
  "samples_per_epoch": 1000,
  "datasets": [
    {"source": "fashion_mnist", "pair": [1, 2], "features": 16},
    {"source": "fashion_mnist", "pair": [5, 7], "features": 64},
    {"source": "pneumonia_mnist", "features": 784},
    {"source": "fashion_mnist", "pair": [3, 4], "features": 784}
  ]
})";

// Tiny synthetic stand-ins written in the real on-disk formats so the MCMD
// pipeline (IDX/NPZ loaders, resize, amplitude embedding) can run end to
// end without the published datasets.
void write_synthetic_image_data(const std::filesystem::path& data_dir) {
  std::filesystem::create_directories(data_dir / "fashion_mnist");
  rng::Prng prng(0xDA7A);
  const std::size_t count = 40;
  std::vector<std::uint8_t> images(count * 28 * 28);
  std::vector<std::uint8_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t label = static_cast<std::uint8_t>(i % 10);
    labels[i] = label;
    for (std::size_t p = 0; p < 28 * 28; ++p) {
      // class-dependent brightness pattern, learnable after resize
      const double base = (label % 2 == 0) ? 40.0 : 200.0;
      images[i * 28 * 28 + p] =
          static_cast<std::uint8_t>(base + prng.next_below(40));
    }
  }
  auto write = [](const std::filesystem::path& path,
                  const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  };
  write(data_dir / "fashion_mnist" / "train-images-idx3-ubyte",
        testsupport::make_idx_images({count, 28, 28}, images));
  write(data_dir / "fashion_mnist" / "train-labels-idx1-ubyte",
        testsupport::make_idx_labels(labels));
  write(data_dir / "fashion_mnist" / "t10k-images-idx3-ubyte",
        testsupport::make_idx_images({count, 28, 28}, images));
  write(data_dir / "fashion_mnist" / "t10k-labels-idx1-ubyte",
        testsupport::make_idx_labels(labels));

  // pneumonia stand-in: 20 images, labels alternate
  const std::size_t pn = 20;
  std::vector<std::uint8_t> pn_images(pn * 28 * 28);
  std::vector<std::uint8_t> pn_labels(pn);
  for (std::size_t i = 0; i < pn; ++i) {
    pn_labels[i] = static_cast<std::uint8_t>(i % 2);
    for (std::size_t p = 0; p < 28 * 28; ++p) {
      const double base = (i % 2 == 0) ? 60.0 : 180.0;
      pn_images[i * 28 * 28 + p] =
          static_cast<std::uint8_t>(base + prng.next_below(30));
    }
  }
  write(data_dir / "pneumoniamnist.npz",
        testsupport::make_zip_archive(
            {{"train_images.npy",
              testsupport::make_npy("|u1", false, {pn, 28, 28}, pn_images)},
             {"train_labels.npy",
              testsupport::make_npy("|u1", false, {pn}, pn_labels)},
             {"test_images.npy",
              testsupport::make_npy("|u1", false, {pn, 28, 28}, pn_images)},
             {"test_labels.npy",
              testsupport::make_npy("|u1", false, {pn}, pn_labels)}},
            true));
}

}  // namespace

TEST_CASE("mcsd preset parses with documented defaults") {
  const RunConfig cfg = harness::parse_config_json(kMcsdJson, "fallback");
  CHECK(cfg.name == "mcsd_star");
  CHECK(cfg.experiment == harness::ExperimentKind::MCSD);
  CHECK(cfg.num_clients() == 3);
  CHECK(cfg.capacities == std::vector<int>{2, 2, 2});
  CHECK(cfg.depth == 8);
  CHECK(cfg.embedding == encode::EmbeddingKind::Angle);
  CHECK(cfg.rounds == 30);  // default applied
  CHECK(cfg.epochs_per_round == 1);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.learning_rate == 0.01);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(cfg.alignment == fedcore::WeightAlignment::FlatPrefix);
  CHECK(cfg.with_baselines);
}

TEST_CASE("mcmd preset parses the heterogeneous column") {
  const RunConfig cfg = harness::parse_config_json(kMcmdJson, "fallback");
  CHECK(cfg.experiment == harness::ExperimentKind::MCMD);
  CHECK(cfg.capacities == std::vector<int>{4, 6, 10, 10});
  CHECK(cfg.depth == 10);
  CHECK(cfg.embedding == encode::EmbeddingKind::Amplitude);
  REQUIRE(cfg.datasets.size() == 4);
  CHECK(cfg.datasets[0].features == 16);
  CHECK(cfg.datasets[1].features == 64);
  CHECK(cfg.datasets[2].features == 784);
  CHECK(cfg.datasets[3].features == 784);
  CHECK(cfg.datasets[0].class_a == 1);
  CHECK(cfg.datasets[0].class_b == 2);
  CHECK(cfg.samples_per_epoch == 1000);
}

TEST_CASE("unknown keys are rejected by name") {
  const char* bad = R"({
    "name": "x", "experiment": "mcsd", "topology": "star",
    "capacities": [2], "datasets": [{"source": "moons"}],
    "rouns": 10
  })";
  try {
    harness::parse_config_json(bad, "x");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("rouns") != std::string::npos);
  }
}

TEST_CASE("schema violations carry the offending key") {
  const char* unequal = R"({
    "experiment": "mcsd", "topology": "star", "capacities": [2, 3],
    "datasets": [{"source": "moons"}]
  })";
  CHECK_THROWS_AS(harness::parse_config_json(unequal, "x"), ConfigError);

  const char* ring_one = R"({
    "experiment": "mcsd", "topology": "ring", "capacities": [2],
    "datasets": [{"source": "moons"}]
  })";
  CHECK_THROWS_AS(harness::parse_config_json(ring_one, "x"), ConfigError);

  const char* angle_mismatch = R"({
    "experiment": "mcmd", "topology": "star", "capacities": [4],
    "embedding": "angle",
    "datasets": [{"source": "fashion_mnist", "pair": [1, 2], "features": 16}]
  })";
  CHECK_THROWS_AS(harness::parse_config_json(angle_mismatch, "x"), ConfigError);

  const char* oversized = R"({
    "experiment": "mcmd", "topology": "star", "capacities": [3],
    "embedding": "amplitude",
    "datasets": [{"source": "fashion_mnist", "pair": [1, 2], "features": 16}]
  })";
  CHECK_THROWS_AS(harness::parse_config_json(oversized, "x"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig a = harness::parse_config_json(kMcsdJson, "x");
  const RunConfig b = harness::parse_config_json(kMcsdJson, "x");
  CHECK(a.config_hash() == b.config_hash());
  RunConfig c = a;
  c.rounds = 31;
  CHECK(a.config_hash() != c.config_hash());
  RunConfig d = a;  // output location does not change run identity
  d.out_dir = "elsewhere";
  CHECK(a.config_hash() == d.config_hash());
}

TEST_CASE("data_dir resolution order: flag, env, config") {
  RunConfig cfg = harness::parse_config_json(kMcsdJson, "x");
  cfg.data_dir = "from_config";
  unsetenv("QFL_DATA_DIR");
  CHECK(harness::resolve_data_dir(cfg, std::nullopt) == "from_config");
  setenv("QFL_DATA_DIR", "from_env", 1);
  CHECK(harness::resolve_data_dir(cfg, std::nullopt) == "from_env");
  CHECK(harness::resolve_data_dir(cfg, std::string("from_flag")) == "from_flag");
  unsetenv("QFL_DATA_DIR");
}

TEST_CASE("mini mcsd run: CSV schema, row counts, determinism") {
  RunConfig cfg = harness::parse_config_json(kMcsdJson, "x");
  cfg.name = "mini";
  cfg.datasets[0].samples = 80;
  cfg.rounds = 2;
  cfg.seeds = {1, 2};
  cfg.batch_size = 8;
  cfg.depth = 1;

  const harness::ExperimentResult result = harness::run_experiment(cfg);
  REQUIRE(result.runs.size() == 2);
  CHECK(result.runs[0].seed == 1);
  CHECK(result.runs[0].rounds.size() == 2);
  // 2k messages per star round
  CHECK(result.runs[0].ledger_totals.messages_sent == 2 * 2 * 3);

  const auto out_a = temp_dir("csv_a");
  harness::emit_metrics_csv(result, out_a);
  const std::string seed1 = read_bytes(out_a / "mini_seed1.csv");
  std::istringstream lines(seed1);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "round,client_id,train_loss,train_acc,test_acc");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    rows += line.empty() ? 0 : 1;
  }
  CHECK(rows == 2 * 3);  // rounds x clients

  // identical re-run produces byte-identical CSVs
  const harness::ExperimentResult rerun = harness::run_experiment(cfg);
  const auto out_b = temp_dir("csv_b");
  harness::emit_metrics_csv(rerun, out_b);
  for (const char* file : {"mini_seed1.csv", "mini_seed2.csv", "mini_aggregate.csv",
                           "mini_qbaseline_aggregate.csv",
                           "mini_cbaseline_aggregate.csv"}) {
    CHECK(read_bytes(out_a / file) == read_bytes(out_b / file));
  }

  // plots render from the summaries
  const auto plots = harness::emit_plots(out_a);
  CHECK(plots.size() == 2);
  for (const auto& plot : plots) {
    const std::string svg = read_bytes(plot);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
  }
  CHECK_THROWS_AS(harness::emit_plots(temp_dir("empty")), UsageError);
}

TEST_CASE("ring experiment reduces message count to k per round") {
  RunConfig cfg = harness::parse_config_json(kMcsdJson, "x");
  cfg.name = "mini_ring";
  cfg.topology = netmodel::TopologyKind::Ring;
  cfg.datasets[0].samples = 60;
  cfg.rounds = 3;
  cfg.seeds = {4};
  cfg.depth = 1;
  cfg.batch_size = 8;
  cfg.with_baselines = false;
  const harness::ExperimentResult result = harness::run_experiment(cfg);
  CHECK(result.runs[0].ledger_totals.messages_sent == 3 * 3);
  CHECK(result.quantum_baseline.empty());
}

TEST_CASE("missing data files surface a path-bearing error") {
  RunConfig cfg = harness::parse_config_json(kMcmdJson, "x");
  cfg.seeds = {1};
  cfg.rounds = 1;
  try {
    harness::run_experiment(cfg, temp_dir("no_data"));
    FAIL("expected NotFoundError");
  } catch (const NotFoundError& e) {
    CHECK(std::string(e.what()).find("fashion_mnist") != std::string::npos);
  }
}

TEST_CASE("mcmd pipeline end to end on synthetic image files") {
  const auto data_dir = temp_dir("synthetic_data");
  write_synthetic_image_data(data_dir);

  RunConfig cfg = harness::parse_config_json(kMcmdJson, "x");
  cfg.name = "mini_mcmd";
  cfg.capacities = {4, 6};
  harness::DatasetSpec pneumonia = cfg.datasets[2];
  pneumonia.features = 64;
  cfg.datasets.resize(2);  // fashion pair + pneumonia
  cfg.datasets[1] = pneumonia;
  cfg.rounds = 2;
  cfg.depth = 2;
  cfg.seeds = {1};
  cfg.batch_size = 4;
  cfg.samples_per_epoch = 8;
  harness::validate_config(cfg);

  const harness::ExperimentResult result = harness::run_experiment(cfg, data_dir);
  REQUIRE(result.runs.size() == 1);
  CHECK(result.runs[0].rounds.size() == 2);
  CHECK(result.runs[0].final_eval.per_client_accuracy.size() == 2);
  // heterogeneous clients keep their own weight counts
  CHECK(result.runs[0].ledger_totals.messages_sent == 2 * 2 * 2);
  REQUIRE(result.task_labels.size() == 2);
  CHECK(result.quantum_baseline.size() == 2);

  // per-layer alignment drives the same pipeline
  cfg.alignment = fedcore::WeightAlignment::PerLayer;
  cfg.name = "mini_mcmd_per_layer";
  const harness::ExperimentResult per_layer = harness::run_experiment(cfg, data_dir);
  CHECK(per_layer.runs[0].rounds.size() == 2);

  // ring over the same data
  cfg.alignment = fedcore::WeightAlignment::FlatPrefix;
  cfg.topology = netmodel::TopologyKind::Ring;
  cfg.name = "mini_mcmd_ring";
  cfg.with_baselines = false;
  const harness::ExperimentResult ring = harness::run_experiment(cfg, data_dir);
  CHECK(ring.runs[0].ledger_totals.messages_sent == 2 * 2);

  // datasets check sees the synthetic files as valid
  std::ostringstream report;
  CHECK(harness::datasets_check(data_dir, report));
  CHECK(report.str().find("OK") != std::string::npos);

  std::ostringstream missing_report;
  CHECK_FALSE(harness::datasets_check(temp_dir("nothing"), missing_report));
}
