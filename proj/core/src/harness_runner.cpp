#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <optional>

#include "qfl/errors.hpp"
#include "qfl/harness.hpp"
#include "qfl/rng.hpp"

namespace qfl::harness {

namespace {

constexpr std::uint64_t kQuantumBaselineTag = 0x0BA5EULL;
constexpr std::uint64_t kClassicalBaselineTag = 0xC1A55ULL;

struct TaskData {
  std::string label;
  data::ClientShard client_shard;     // features sized for the client
  data::ClientShard qbaseline_shard;  // features sized for the quantum baseline
  data::ClientShard native_shard;     // full-resolution features for the MLP
  vqc::CircuitSpec client_spec;
  vqc::CircuitSpec qbaseline_spec;
  trainers::MlpSpec mlp_spec;
};

struct ExperimentData {
  std::vector<TaskData> tasks;  // MCSD: one task, shared shards live per client
  std::vector<data::ClientShard> client_shards;  // per client
  std::vector<vqc::CircuitSpec> client_specs;    // per client
};

int side_for_features(int features) {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(features))));
}

// The number of embeddable features for a node of the given capacity: the
// largest square image that fits 2^capacity amplitudes, capped at native.
int baseline_features_for(int capacity, int native_side) {
  const double amplitudes = std::pow(2.0, capacity);
  int side = static_cast<int>(std::floor(std::sqrt(amplitudes)));
  side = std::min(side, native_side);
  return side * side;
}

data::ClientShard resized_shard(const data::ClientShard& native, int features) {
  const int side = side_for_features(features);
  data::ClientShard out;
  out.client_id = native.client_id;
  out.train = data::resize_dataset(native.train, side, side);
  out.test = data::resize_dataset(native.test, side, side);
  return out;
}

data::ClientShard load_fashion_task(const std::filesystem::path& data_dir,
                                    const DatasetSpec& spec) {
  const std::filesystem::path dir = data_dir / "fashion_mnist";
  const data::U8Tensor train_images = data::load_idx(dir / "train-images-idx3-ubyte");
  const data::U8Tensor train_labels_raw =
      data::load_idx(dir / "train-labels-idx1-ubyte");
  const data::U8Tensor test_images = data::load_idx(dir / "t10k-images-idx3-ubyte");
  const data::U8Tensor test_labels_raw =
      data::load_idx(dir / "t10k-labels-idx1-ubyte");
  const std::vector<int> train_labels(train_labels_raw.bytes.begin(),
                                      train_labels_raw.bytes.end());
  const std::vector<int> test_labels(test_labels_raw.bytes.begin(),
                                     test_labels_raw.bytes.end());
  data::ClientShard shard;
  shard.train = data::make_binary_subset(train_images, train_labels, spec.class_a,
                                         spec.class_b, spec.label());
  shard.test = data::make_binary_subset(test_images, test_labels, spec.class_a,
                                        spec.class_b, spec.label());
  return shard;
}

data::ClientShard load_pneumonia_task(const std::filesystem::path& data_dir,
                                      const DatasetSpec& spec) {
  const std::filesystem::path file = data_dir / "pneumoniamnist.npz";
  auto to_dataset = [&](const char* images_name, const char* labels_name) {
    const data::NpyArray images = data::load_npz_array(file, images_name);
    const data::NpyArray labels = data::load_npz_array(file, labels_name);
    if (images.shape.size() != 3) {
      throw FormatError("pneumoniamnist images must be (count, h, w)");
    }
    data::Dataset ds;
    ds.name = spec.label();
    ds.meta_h = static_cast<int>(images.shape[1]);
    ds.meta_w = static_cast<int>(images.shape[2]);
    const std::size_t pixels = static_cast<std::size_t>(ds.meta_h) * ds.meta_w;
    ds.features = Matrix(images.shape[0], pixels);
    for (std::size_t i = 0; i < images.values.size(); ++i) {
      ds.features.values[i] = images.values[i] / 255.0;
    }
    ds.labels.reserve(images.shape[0]);
    for (std::size_t i = 0; i < images.shape[0]; ++i) {
      ds.labels.push_back(labels.values[i] >= 0.5 ? 1 : 0);
    }
    ds.validate();
    return ds;
  };
  data::ClientShard shard;
  shard.train = to_dataset("train_images", "train_labels");
  shard.test = to_dataset("test_images", "test_labels");
  return shard;
}

// Fits the angle-embedding scaler on the shard's train split and maps both
// splits to [0, pi].
void scale_shard_for_angle(data::ClientShard& shard) {
  encode::FeatureScaler scaler(0.0, 3.14159265358979323846);
  scaler.fit(shard.train.features);
  shard.train.features = scaler.transform(shard.train.features);
  shard.test.features = scaler.transform(shard.test.features);
}

vqc::CircuitSpec client_spec_for(const RunConfig& cfg, int capacity, int features) {
  vqc::CircuitSpec spec;
  spec.num_qubits = capacity;
  spec.depth = cfg.depth;
  spec.embedding = cfg.embedding;
  spec.num_features = features;
  spec.validate();
  return spec;
}

ExperimentData build_mcsd_data(const RunConfig& cfg, std::uint64_t seed) {
  const DatasetSpec& ds_spec = cfg.datasets.front();
  const data::Dataset moons = data::generate_moons(
      ds_spec.samples, ds_spec.noise, rng::mix(seed, {rng::kMoons}));

  ExperimentData data;
  std::vector<data::ClientShard> shards =
      data::partition_for_clients(moons, cfg.num_clients(), seed);
  auto [train, test] = data::train_test_split(moons, seed);

  TaskData task;
  task.label = ds_spec.label();
  task.qbaseline_shard = data::ClientShard{0, train, test};
  task.native_shard = task.qbaseline_shard;
  if (cfg.embedding == encode::EmbeddingKind::Angle) {
    scale_shard_for_angle(task.qbaseline_shard);
    for (data::ClientShard& shard : shards) {
      scale_shard_for_angle(shard);
    }
  }
  task.client_spec = client_spec_for(cfg, cfg.capacities.front(), 2);
  task.qbaseline_spec = task.client_spec;
  task.mlp_spec = trainers::MlpSpec{2, {32}, trainers::Activation::ReLU};

  data.client_specs.assign(static_cast<std::size_t>(cfg.num_clients()),
                           task.client_spec);
  data.client_shards = std::move(shards);
  data.tasks.push_back(std::move(task));
  return data;
}

ExperimentData build_mcmd_data(const RunConfig& cfg,
                               const std::filesystem::path& data_dir) {
  ExperimentData data;
  for (int k = 0; k < cfg.num_clients(); ++k) {
    const DatasetSpec& ds_spec = cfg.datasets[static_cast<std::size_t>(k)];
    TaskData task;
    task.label = ds_spec.label();
    data::ClientShard native = ds_spec.source == "fashion_mnist"
                                   ? load_fashion_task(data_dir, ds_spec)
                                   : load_pneumonia_task(data_dir, ds_spec);
    native.client_id = k;
    task.client_spec = client_spec_for(cfg, cfg.capacities[k], ds_spec.features);

    const int baseline_capacity =
        *std::max_element(cfg.capacities.begin(), cfg.capacities.end());
    const int baseline_features =
        baseline_features_for(baseline_capacity, native.train.meta_h);
    task.qbaseline_spec = client_spec_for(cfg, baseline_capacity, baseline_features);

    task.client_shard = resized_shard(native, ds_spec.features);
    task.qbaseline_shard = resized_shard(native, baseline_features);
    task.mlp_spec = trainers::MlpSpec{
        static_cast<int>(native.train.features.cols), {64},
        trainers::Activation::ReLU};
    task.native_shard = std::move(native);

    data.client_shards.push_back(task.client_shard);
    data.client_specs.push_back(task.client_spec);
    data.tasks.push_back(std::move(task));
  }
  return data;
}

netmodel::NetworkTopology build_topology(const RunConfig& cfg) {
  if (cfg.topology == netmodel::TopologyKind::Star) {
    const int hub_capacity =
        *std::max_element(cfg.capacities.begin(), cfg.capacities.end());
    return netmodel::build_star(cfg.capacities, hub_capacity);
  }
  return netmodel::build_ring(cfg.capacities);
}

RunRecord run_one_seed(const RunConfig& cfg, const ExperimentData& data,
                       std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const netmodel::NetworkTopology topology = build_topology(cfg);
  netmodel::LinkLedger ledger(topology);
  const fedcore::TrainSchedule schedule = cfg.schedule();

  std::vector<fedcore::ClientState> clients;
  clients.reserve(data.client_shards.size());
  for (std::size_t k = 0; k < data.client_shards.size(); ++k) {
    const vqc::CircuitSpec& spec = data.client_specs[k];
    netmodel::check_capacity(topology.nodes[k], spec);
    vqc::WeightVector init;
    if (cfg.topology == netmodel::TopologyKind::Star) {
      init.assign(static_cast<std::size_t>(spec.weight_count()), 0.0);
    } else {
      init = vqc::init_weights(
          static_cast<std::size_t>(spec.weight_count()),
          rng::mix(seed, {rng::kWeightInit, static_cast<std::uint64_t>(k)}));
    }
    clients.push_back(fedcore::make_client(static_cast<int>(k), spec,
                                           data.client_shards[k], std::move(init),
                                           schedule.adam));
  }

  RunRecord record;
  record.config_hash = cfg.config_hash();
  record.seed = seed;

  if (cfg.topology == netmodel::TopologyKind::Star) {
    const fedcore::WeightShape gs = fedcore::global_shape_of(clients);
    vqc::WeightVector global = vqc::init_weights(
        static_cast<std::size_t>(gs.depth) * static_cast<std::size_t>(gs.qubits),
        rng::mix(seed, {rng::kWeightInit}));
    fedcore::distribute_to_clients(global, clients, cfg.alignment);
    for (int r = 0; r < cfg.rounds; ++r) {
      record.rounds.push_back(fedcore::run_star_round(
          clients, global, topology, ledger, schedule, r, seed, cfg.alignment));
    }
  } else {
    for (int r = 0; r < cfg.rounds; ++r) {
      record.rounds.push_back(fedcore::run_ring_round(
          clients, topology, ledger, schedule, r, seed, cfg.alignment));
    }
  }
  record.final_eval = fedcore::evaluate_final(clients);
  record.ledger_totals = ledger.totals();
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg) {
  return run_experiment(cfg, resolve_data_dir(cfg, std::nullopt));
}

ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::filesystem::path& data_dir) {
  validate_config(cfg);
  ExperimentResult result;
  result.config = cfg;

  // MCMD data is seed-independent; build it once. MCSD re-generates moons
  // per seed (noise and partition follow the run seed).
  std::optional<ExperimentData> shared_data;
  if (cfg.experiment == ExperimentKind::MCMD) {
    shared_data = build_mcmd_data(cfg, data_dir);
  }
  auto data_for_seed = [&](std::uint64_t seed) {
    return cfg.experiment == ExperimentKind::MCMD ? *shared_data
                                                  : build_mcsd_data(cfg, seed);
  };

  // QFL runs, one per seed, concurrently.
  {
    std::vector<std::future<RunRecord>> futures;
    futures.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
      futures.push_back(std::async(std::launch::async, [&, seed] {
        const ExperimentData data = data_for_seed(seed);
        return run_one_seed(cfg, data, seed);
      }));
    }
    for (auto& f : futures) {
      result.runs.push_back(f.get());
    }
  }

  if (!cfg.with_baselines) {
    if (cfg.experiment == ExperimentKind::MCMD) {
      for (const TaskData& task : shared_data->tasks) {
        result.task_labels.push_back(task.label);
      }
    } else {
      result.task_labels.push_back(cfg.datasets.front().label());
    }
    return result;
  }

  // Baselines: per task, per seed. MCSD has one task over the whole
  // dataset; MCMD has one per client dataset.
  const fedcore::TrainSchedule schedule = cfg.schedule();
  const std::size_t num_tasks = cfg.experiment == ExperimentKind::MCMD
                                    ? shared_data->tasks.size()
                                    : 1;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    result.task_labels.push_back(cfg.experiment == ExperimentKind::MCMD
                                     ? shared_data->tasks[t].label
                                     : cfg.datasets.front().label());
    result.quantum_baseline.emplace_back(cfg.seeds.size());
    result.classical_baseline.emplace_back(cfg.seeds.size());
  }

  std::vector<std::future<void>> futures;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      futures.push_back(std::async(std::launch::async, [&, t, si] {
        const std::uint64_t seed = cfg.seeds[si];
        const ExperimentData data = cfg.experiment == ExperimentKind::MCMD
                                        ? ExperimentData{}
                                        : build_mcsd_data(cfg, seed);
        const TaskData& task = cfg.experiment == ExperimentKind::MCMD
                                   ? shared_data->tasks[t]
                                   : data.tasks.front();
        result.quantum_baseline[t][si] = trainers::train_quantum_baseline(
            task.qbaseline_spec, task.qbaseline_shard, schedule, cfg.rounds,
            rng::mix(seed, {kQuantumBaselineTag, static_cast<std::uint64_t>(t)}));
        result.classical_baseline[t][si] = trainers::train_mlp_baseline(
            task.mlp_spec, task.native_shard, schedule, cfg.rounds,
            rng::mix(seed, {kClassicalBaselineTag, static_cast<std::uint64_t>(t)}));
      }));
    }
  }
  for (auto& f : futures) {
    f.get();
  }
  return result;
}

}  // namespace qfl::harness
