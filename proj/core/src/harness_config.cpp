#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfl/errors.hpp"
#include "qfl/harness.hpp"

namespace qfl::harness {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + context);
    }
  }
}

ExperimentKind parse_experiment(const std::string& s) {
  if (s == "mcsd") {
    return ExperimentKind::MCSD;
  }
  if (s == "mcmd") {
    return ExperimentKind::MCMD;
  }
  throw ConfigError("experiment must be 'mcsd' or 'mcmd', got '" + s + "'");
}

netmodel::TopologyKind parse_topology(const std::string& s) {
  if (s == "star") {
    return netmodel::TopologyKind::Star;
  }
  if (s == "ring") {
    return netmodel::TopologyKind::Ring;
  }
  throw ConfigError("topology must be 'star' or 'ring', got '" + s + "'");
}

encode::EmbeddingKind parse_embedding(const std::string& s) {
  if (s == "angle") {
    return encode::EmbeddingKind::Angle;
  }
  if (s == "amplitude") {
    return encode::EmbeddingKind::Amplitude;
  }
  throw ConfigError("embedding must be 'angle' or 'amplitude', got '" + s + "'");
}

fedcore::WeightAlignment parse_alignment(const std::string& s) {
  if (s == "flat_prefix") {
    return fedcore::WeightAlignment::FlatPrefix;
  }
  if (s == "per_layer") {
    return fedcore::WeightAlignment::PerLayer;
  }
  throw ConfigError("alignment must be 'flat_prefix' or 'per_layer', got '" + s + "'");
}

DatasetSpec parse_dataset(const json& obj, const std::string& context) {
  if (!obj.is_object()) {
    throw ConfigError(context + " must be an object");
  }
  reject_unknown_keys(obj, {"source", "pair", "features", "samples", "noise"},
                      context);
  DatasetSpec ds;
  if (!obj.contains("source")) {
    throw ConfigError(context + " lacks required key 'source'");
  }
  ds.source = obj.at("source").get<std::string>();
  if (ds.source != "moons" && ds.source != "fashion_mnist" &&
      ds.source != "pneumonia_mnist") {
    throw ConfigError(context + ": unknown source '" + ds.source + "'");
  }
  if (obj.contains("pair")) {
    const json& pair = obj.at("pair");
    if (!pair.is_array() || pair.size() != 2) {
      throw ConfigError(context + ": 'pair' must be a two-element array");
    }
    ds.class_a = pair.at(0).get<int>();
    ds.class_b = pair.at(1).get<int>();
  }
  if (obj.contains("features")) {
    ds.features = obj.at("features").get<int>();
  }
  if (obj.contains("samples")) {
    ds.samples = obj.at("samples").get<std::size_t>();
  }
  if (obj.contains("noise")) {
    ds.noise = obj.at("noise").get<double>();
  }
  return ds;
}

}  // namespace

std::string DatasetSpec::label() const {
  std::ostringstream out;
  out << source;
  if (class_a >= 0) {
    out << "_" << class_a << "v" << class_b;
  }
  if (source == "moons") {
    out << "_" << samples;
  } else {
    out << "_f" << features;
  }
  return out.str();
}

fedcore::TrainSchedule RunConfig::schedule() const {
  fedcore::TrainSchedule s;
  s.epochs_per_round = epochs_per_round;
  s.batch_size = batch_size;
  s.samples_per_epoch = samples_per_epoch;
  s.adam.learning_rate = learning_rate;
  return s;
}

RunConfig parse_config_json(const std::string& json_text,
                            const std::string& default_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  reject_unknown_keys(
      root,
      {"name", "experiment", "topology", "capacities", "depth", "embedding",
       "datasets", "rounds", "epochs_per_round", "batch_size",
       "samples_per_epoch", "learning_rate", "seeds", "data_dir", "out_dir",
       "alignment", "with_baselines"},
      "config");

  RunConfig cfg;
  cfg.name = root.value("name", default_name);
  for (const char* required : {"experiment", "topology", "capacities", "datasets"}) {
    if (!root.contains(required)) {
      throw ConfigError(std::string("config lacks required key '") + required + "'");
    }
  }
  cfg.experiment = parse_experiment(root.at("experiment").get<std::string>());
  cfg.topology = parse_topology(root.at("topology").get<std::string>());
  if (!root.at("capacities").is_array() || root.at("capacities").empty()) {
    throw ConfigError("'capacities' must be a non-empty array");
  }
  cfg.capacities = root.at("capacities").get<std::vector<int>>();
  if (root.contains("depth")) {
    cfg.depth = root.at("depth").get<int>();
  }
  if (root.contains("embedding")) {
    cfg.embedding = parse_embedding(root.at("embedding").get<std::string>());
  }
  const json& datasets = root.at("datasets");
  if (!datasets.is_array() || datasets.empty()) {
    throw ConfigError("'datasets' must be a non-empty array");
  }
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    cfg.datasets.push_back(
        parse_dataset(datasets.at(i), "datasets[" + std::to_string(i) + "]"));
  }
  if (root.contains("rounds")) {
    cfg.rounds = root.at("rounds").get<int>();
  }
  if (root.contains("epochs_per_round")) {
    cfg.epochs_per_round = root.at("epochs_per_round").get<int>();
  }
  if (root.contains("batch_size")) {
    cfg.batch_size = root.at("batch_size").get<int>();
  }
  if (root.contains("samples_per_epoch")) {
    cfg.samples_per_epoch = root.at("samples_per_epoch").get<std::size_t>();
  }
  if (root.contains("learning_rate")) {
    cfg.learning_rate = root.at("learning_rate").get<double>();
  }
  if (root.contains("seeds")) {
    cfg.seeds = root.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (root.contains("data_dir")) {
    cfg.data_dir = root.at("data_dir").get<std::string>();
  }
  if (root.contains("out_dir")) {
    cfg.out_dir = root.at("out_dir").get<std::string>();
  }
  if (root.contains("alignment")) {
    cfg.alignment = parse_alignment(root.at("alignment").get<std::string>());
  }
  if (root.contains("with_baselines")) {
    cfg.with_baselines = root.at("with_baselines").get<bool>();
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str(), path.stem().string());
}

void validate_config(const RunConfig& cfg) {
  if (cfg.name.empty()) {
    throw ConfigError("'name' must not be empty");
  }
  if (cfg.topology != netmodel::TopologyKind::Star &&
      cfg.topology != netmodel::TopologyKind::Ring) {
    throw ConfigError("only star and ring topologies are executable");
  }
  const int clients = cfg.num_clients();
  if (clients < 1) {
    throw ConfigError("'capacities' must list at least one client");
  }
  if (cfg.topology == netmodel::TopologyKind::Ring && clients < 2) {
    throw ConfigError("a ring needs at least two clients ('capacities')");
  }
  for (int c : cfg.capacities) {
    if (c < 1 || c > qsim::kMaxQubits) {
      throw ConfigError("'capacities' entries must be in [1, " +
                        std::to_string(qsim::kMaxQubits) + "]");
    }
  }
  if (cfg.depth < 0) {
    throw ConfigError("'depth' must be >= 0");
  }
  if (cfg.rounds < 1) {
    throw ConfigError("'rounds' must be >= 1");
  }
  if (cfg.epochs_per_round < 1) {
    throw ConfigError("'epochs_per_round' must be >= 1");
  }
  if (cfg.batch_size < 1) {
    throw ConfigError("'batch_size' must be >= 1");
  }
  if (cfg.learning_rate <= 0.0) {
    throw ConfigError("'learning_rate' must be positive");
  }
  if (cfg.seeds.empty()) {
    throw ConfigError("'seeds' must not be empty");
  }

  if (cfg.experiment == ExperimentKind::MCSD) {
    if (cfg.datasets.size() != 1) {
      throw ConfigError("mcsd takes exactly one 'datasets' entry");
    }
    if (cfg.datasets.front().source != "moons") {
      throw ConfigError("mcsd runs on the moons source");
    }
    for (int c : cfg.capacities) {
      if (c != cfg.capacities.front()) {
        throw ConfigError("mcsd clients must have equal 'capacities'");
      }
    }
  } else {
    if (cfg.datasets.size() != static_cast<std::size_t>(clients)) {
      throw ConfigError("mcmd needs one 'datasets' entry per client (" +
                        std::to_string(clients) + ")");
    }
  }

  for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
    const DatasetSpec& ds = cfg.datasets[i];
    const std::string context = "datasets[" + std::to_string(i) + "]";
    const int capacity =
        cfg.experiment == ExperimentKind::MCSD ? cfg.capacities.front()
                                               : cfg.capacities[i];
    if (ds.source == "moons") {
      if (ds.samples < 2) {
        throw ConfigError(context + ": moons 'samples' must be >= 2");
      }
      if (ds.features != 0 && ds.features != 2) {
        throw ConfigError(context + ": moons provides exactly 2 'features'");
      }
    } else {
      if (ds.source == "fashion_mnist") {
        if (ds.class_a < 0 || ds.class_b < 0 || ds.class_a > 9 || ds.class_b > 9 ||
            ds.class_a == ds.class_b) {
          throw ConfigError(context +
                            ": fashion_mnist needs a 'pair' of two distinct "
                            "classes in [0, 9]");
        }
      } else if (ds.class_a >= 0 || ds.class_b >= 0) {
        throw ConfigError(context + ": 'pair' only applies to fashion_mnist");
      }
      if (ds.features < 1) {
        throw ConfigError(context + ": image sources need 'features' >= 1");
      }
      const int side = static_cast<int>(std::sqrt(static_cast<double>(ds.features)));
      if (side * side != ds.features || side > 28) {
        throw ConfigError(context +
                          ": image 'features' must be a square number <= 784");
      }
    }
    const int features = ds.source == "moons" ? 2 : ds.features;
    try {
      encode::validate_embedding(cfg.embedding, features, capacity);
    } catch (const ShapeError& e) {
      throw ConfigError(context + ": " + e.what());
    }
  }
}

std::filesystem::path resolve_data_dir(const RunConfig& cfg,
                                       const std::optional<std::string>& flag_value) {
  if (flag_value.has_value() && !flag_value->empty()) {
    return *flag_value;
  }
  if (const char* env = std::getenv("QFL_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.data_dir;
}

namespace {

json dataset_to_json(const DatasetSpec& ds) {
  json obj;
  obj["source"] = ds.source;
  if (ds.class_a >= 0) {
    obj["pair"] = {ds.class_a, ds.class_b};
  }
  if (ds.source == "moons") {
    obj["samples"] = ds.samples;
    obj["noise"] = ds.noise;
  } else {
    obj["features"] = ds.features;
  }
  return obj;
}

}  // namespace

std::string RunConfig::to_json_string() const {
  json obj;
  obj["name"] = name;
  obj["experiment"] = experiment == ExperimentKind::MCSD ? "mcsd" : "mcmd";
  obj["topology"] = topology == netmodel::TopologyKind::Star ? "star" : "ring";
  obj["capacities"] = capacities;
  obj["depth"] = depth;
  obj["embedding"] =
      embedding == encode::EmbeddingKind::Angle ? "angle" : "amplitude";
  obj["datasets"] = json::array();
  for (const DatasetSpec& ds : datasets) {
    obj["datasets"].push_back(dataset_to_json(ds));
  }
  obj["rounds"] = rounds;
  obj["epochs_per_round"] = epochs_per_round;
  obj["batch_size"] = batch_size;
  obj["samples_per_epoch"] = samples_per_epoch;
  obj["learning_rate"] = learning_rate;
  obj["seeds"] = seeds;
  obj["data_dir"] = data_dir;
  obj["out_dir"] = out_dir;
  obj["alignment"] = alignment == fedcore::WeightAlignment::FlatPrefix
                         ? "flat_prefix"
                         : "per_layer";
  obj["with_baselines"] = with_baselines;
  return obj.dump(2);
}

std::uint64_t RunConfig::config_hash() const {
  RunConfig canonical = *this;
  canonical.data_dir.clear();
  canonical.out_dir.clear();
  const std::string text = canonical.to_json_string();
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace qfl::harness
