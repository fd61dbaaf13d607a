#include "qfl/fedcore.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "qfl/errors.hpp"
#include "qfl/rng.hpp"

namespace qfl::fedcore {

namespace {

std::vector<vqc::Sample> samples_for(const data::Dataset& ds,
                                     std::span<const std::size_t> indices) {
  std::vector<vqc::Sample> batch;
  batch.reserve(indices.size());
  for (std::size_t idx : indices) {
    batch.push_back(vqc::Sample{ds.features.row(idx), ds.labels[idx]});
  }
  return batch;
}

std::vector<vqc::Sample> all_samples(const data::Dataset& ds) {
  std::vector<vqc::Sample> batch;
  batch.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    batch.push_back(vqc::Sample{ds.features.row(i), ds.labels[i]});
  }
  return batch;
}

vqc::EvalMetrics test_metrics(const ClientState& client) {
  const std::vector<vqc::Sample> batch = all_samples(client.shard.test);
  return vqc::evaluate(client.spec, client.last_trained, batch);
}

void fill_round_means(RoundMetrics& metrics) {
  double loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  for (const ClientRoundMetrics& c : metrics.clients) {
    loss += c.train_loss;
    train_acc += c.train_accuracy;
    test_acc += c.test_accuracy;
  }
  const double k = static_cast<double>(metrics.clients.size());
  metrics.mean_train_loss = loss / k;
  metrics.mean_train_accuracy = train_acc / k;
  metrics.mean_test_accuracy = test_acc / k;
}

// Trains every client concurrently (clients share nothing mutable) and
// fills per-client train and test metrics in index order.
RoundMetrics train_all_clients(std::vector<ClientState>& clients,
                               const TrainSchedule& schedule, int round_idx,
                               std::uint64_t run_seed) {
  RoundMetrics metrics;
  metrics.round_idx = round_idx;
  metrics.clients.resize(clients.size());
  std::vector<std::future<ClientRoundMetrics>> futures;
  futures.reserve(clients.size());
  for (ClientState& client : clients) {
    futures.push_back(std::async(std::launch::async, [&client, &schedule, round_idx,
                                                      run_seed] {
      ClientRoundMetrics m = local_train_round(client, schedule, round_idx, run_seed);
      const vqc::EvalMetrics test = test_metrics(client);
      m.test_loss = test.mean_loss;
      m.test_accuracy = test.accuracy;
      return m;
    }));
  }
  for (std::size_t i = 0; i < futures.size(); ++i) {
    metrics.clients[i] = futures[i].get();
  }
  fill_round_means(metrics);
  return metrics;
}

}  // namespace

ClientState make_client(int client_id, const vqc::CircuitSpec& spec,
                        data::ClientShard shard, vqc::WeightVector initial_weights,
                        vqc::AdamConfig adam) {
  spec.validate();
  if (initial_weights.size() != static_cast<std::size_t>(spec.weight_count())) {
    throw ShapeError("client " + std::to_string(client_id) +
                     ": initial weights length mismatch");
  }
  ClientState client;
  client.client_id = client_id;
  client.spec = spec;
  client.weights = std::move(initial_weights);
  client.optimizer = vqc::AdamState(client.weights.size(), adam);
  client.shard = std::move(shard);
  client.last_trained = client.weights;
  return client;
}

ClientRoundMetrics local_train_round(ClientState& client,
                                     const TrainSchedule& schedule, int round_idx,
                                     std::uint64_t run_seed) {
  const data::Dataset& train = client.shard.train;
  if (train.size() == 0) {
    throw UsageError("client " + std::to_string(client.client_id) +
                     " has an empty train shard");
  }
  if (schedule.batch_size < 1) {
    throw UsageError("batch_size must be >= 1");
  }
  const std::size_t per_epoch = schedule.samples_per_epoch == 0
                                    ? train.size()
                                    : std::min(schedule.samples_per_epoch, train.size());

  // The epoch stream depends on (run_seed, round) only: clients with equal
  // shards, specs, and start weights train identically, which the
  // symmetry and baseline-reduction properties rely on.
  const std::uint64_t epoch_seed =
      rng::mix(run_seed, {static_cast<std::uint64_t>(round_idx)});
  double loss_sum = 0.0;
  double correct_sum = 0.0;
  std::size_t seen = 0;
  for (int epoch = 0; epoch < schedule.epochs_per_round; ++epoch) {
    const std::vector<std::size_t> order =
        data::epoch_sample(train, per_epoch, epoch_seed,
                           static_cast<std::uint64_t>(epoch));
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(schedule.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(schedule.batch_size));
      const std::vector<vqc::Sample> batch = samples_for(
          train, std::span<const std::size_t>(order.data() + begin, end - begin));
      const vqc::EvalMetrics eval = vqc::evaluate(client.spec, client.weights, batch);
      loss_sum += eval.mean_loss * static_cast<double>(batch.size());
      correct_sum += eval.accuracy * static_cast<double>(batch.size());
      seen += batch.size();
      const vqc::WeightVector grad = vqc::gradient(client.spec, client.weights, batch);
      vqc::sgd_adam_step(client.weights, grad, client.optimizer);
    }
  }
  client.last_trained = client.weights;

  ClientRoundMetrics metrics;
  if (seen > 0) {
    metrics.train_loss = loss_sum / static_cast<double>(seen);
    metrics.train_accuracy = correct_sum / static_cast<double>(seen);
  }
  return metrics;
}

vqc::WeightVector aggregate_star(const std::vector<vqc::WeightVector>& client_weights) {
  if (client_weights.empty()) {
    throw UsageError("aggregate_star: no client weights");
  }
  std::size_t max_len = 0;
  for (const vqc::WeightVector& w : client_weights) {
    max_len = std::max(max_len, w.size());
  }
  vqc::WeightVector global(max_len, 0.0);
  for (std::size_t i = 0; i < max_len; ++i) {
    double sum = 0.0;
    std::size_t present = 0;
    for (const vqc::WeightVector& w : client_weights) {
      if (i < w.size()) {
        sum += w[i];
        ++present;
      }
    }
    global[i] = sum / static_cast<double>(present);
  }
  return global;
}

vqc::WeightVector distribute_star(const vqc::WeightVector& global,
                                  std::size_t client_len) {
  if (client_len > global.size()) {
    throw UsageError("distribute_star: client needs " + std::to_string(client_len) +
                     " weights but the global model has " +
                     std::to_string(global.size()));
  }
  return vqc::WeightVector(global.begin(),
                           global.begin() + static_cast<std::ptrdiff_t>(client_len));
}

vqc::WeightVector ring_adapt_weights(const vqc::WeightVector& incoming,
                                     const vqc::WeightVector& own_previous) {
  const std::size_t n = own_previous.size();
  if (incoming.size() >= n) {
    return vqc::WeightVector(incoming.begin(),
                             incoming.begin() + static_cast<std::ptrdiff_t>(n));
  }
  vqc::WeightVector adapted = incoming;
  adapted.insert(adapted.end(),
                 own_previous.begin() + static_cast<std::ptrdiff_t>(incoming.size()),
                 own_previous.end());
  return adapted;
}

namespace {

void check_shape(const vqc::WeightVector& w, WeightShape s, const char* what) {
  if (w.size() != static_cast<std::size_t>(s.depth) * static_cast<std::size_t>(s.qubits)) {
    throw ShapeError(std::string(what) + ": weight length " +
                     std::to_string(w.size()) + " != depth*qubits = " +
                     std::to_string(s.depth * s.qubits));
  }
}

}  // namespace

vqc::WeightVector aggregate_star_per_layer(
    const std::vector<vqc::WeightVector>& client_weights,
    const std::vector<WeightShape>& shapes, WeightShape global_shape) {
  if (client_weights.empty()) {
    throw UsageError("aggregate_star_per_layer: no client weights");
  }
  if (client_weights.size() != shapes.size()) {
    throw ShapeError("aggregate_star_per_layer: shapes/weights count mismatch");
  }
  for (std::size_t c = 0; c < client_weights.size(); ++c) {
    check_shape(client_weights[c], shapes[c], "aggregate_star_per_layer");
  }
  vqc::WeightVector global(
      static_cast<std::size_t>(global_shape.depth) * global_shape.qubits, 0.0);
  for (int l = 0; l < global_shape.depth; ++l) {
    for (int q = 0; q < global_shape.qubits; ++q) {
      double sum = 0.0;
      std::size_t present = 0;
      for (std::size_t c = 0; c < client_weights.size(); ++c) {
        if (l < shapes[c].depth && q < shapes[c].qubits) {
          sum += client_weights[c][static_cast<std::size_t>(l) * shapes[c].qubits + q];
          ++present;
        }
      }
      if (present == 0) {
        throw UsageError("aggregate_star_per_layer: cell (" + std::to_string(l) +
                         ", " + std::to_string(q) + ") has no contributor");
      }
      global[static_cast<std::size_t>(l) * global_shape.qubits + q] =
          sum / static_cast<double>(present);
    }
  }
  return global;
}

vqc::WeightVector distribute_star_per_layer(const vqc::WeightVector& global,
                                            WeightShape global_shape,
                                            WeightShape client_shape) {
  check_shape(global, global_shape, "distribute_star_per_layer");
  if (client_shape.depth > global_shape.depth ||
      client_shape.qubits > global_shape.qubits) {
    throw UsageError("distribute_star_per_layer: client shape exceeds global");
  }
  vqc::WeightVector out(
      static_cast<std::size_t>(client_shape.depth) * client_shape.qubits);
  for (int l = 0; l < client_shape.depth; ++l) {
    for (int q = 0; q < client_shape.qubits; ++q) {
      out[static_cast<std::size_t>(l) * client_shape.qubits + q] =
          global[static_cast<std::size_t>(l) * global_shape.qubits + q];
    }
  }
  return out;
}

vqc::WeightVector ring_adapt_weights_per_layer(const vqc::WeightVector& incoming,
                                               WeightShape incoming_shape,
                                               const vqc::WeightVector& own_previous,
                                               WeightShape own_shape) {
  check_shape(incoming, incoming_shape, "ring_adapt_weights_per_layer");
  check_shape(own_previous, own_shape, "ring_adapt_weights_per_layer");
  vqc::WeightVector out(own_previous.size());
  for (int l = 0; l < own_shape.depth; ++l) {
    for (int q = 0; q < own_shape.qubits; ++q) {
      const std::size_t dst = static_cast<std::size_t>(l) * own_shape.qubits + q;
      if (l < incoming_shape.depth && q < incoming_shape.qubits) {
        out[dst] = incoming[static_cast<std::size_t>(l) * incoming_shape.qubits + q];
      } else {
        out[dst] = own_previous[dst];
      }
    }
  }
  return out;
}

WeightShape global_shape_of(const std::vector<ClientState>& clients) {
  WeightShape shape;
  for (const ClientState& c : clients) {
    shape.depth = std::max(shape.depth, c.spec.depth);
    shape.qubits = std::max(shape.qubits, c.spec.num_qubits);
  }
  return shape;
}

void distribute_to_clients(const vqc::WeightVector& global,
                           std::vector<ClientState>& clients,
                           WeightAlignment alignment) {
  const WeightShape gs = global_shape_of(clients);
  for (ClientState& client : clients) {
    if (alignment == WeightAlignment::FlatPrefix) {
      client.weights = distribute_star(global, client.weights.size());
    } else {
      client.weights = distribute_star_per_layer(global, gs, client.shape());
    }
  }
}

RoundMetrics run_star_round(std::vector<ClientState>& clients,
                            vqc::WeightVector& global,
                            const netmodel::NetworkTopology& topology,
                            netmodel::LinkLedger& ledger,
                            const TrainSchedule& schedule, int round_idx,
                            std::uint64_t run_seed, WeightAlignment alignment) {
  if (clients.empty()) {
    throw UsageError("run_star_round: no clients");
  }
  const int hub = topology.aggregator_id();
  RoundMetrics metrics = train_all_clients(clients, schedule, round_idx, run_seed);

  std::vector<vqc::WeightVector> trained;
  std::vector<WeightShape> shapes;
  trained.reserve(clients.size());
  for (ClientState& client : clients) {
    ledger.send_weights(netmodel::Edge(client.client_id, hub),
                        client.last_trained.size());
    trained.push_back(client.last_trained);
    shapes.push_back(client.shape());
  }
  if (alignment == WeightAlignment::FlatPrefix) {
    global = aggregate_star(trained);
  } else {
    global = aggregate_star_per_layer(trained, shapes, global_shape_of(clients));
  }
  for (ClientState& client : clients) {
    ledger.send_weights(netmodel::Edge(hub, client.client_id),
                        client.weights.size());
  }
  distribute_to_clients(global, clients, alignment);
  return metrics;
}

RoundMetrics run_ring_round(std::vector<ClientState>& clients,
                            const netmodel::NetworkTopology& topology,
                            netmodel::LinkLedger& ledger,
                            const TrainSchedule& schedule, int round_idx,
                            std::uint64_t run_seed, WeightAlignment alignment) {
  if (clients.size() < 2) {
    throw UsageError("run_ring_round: a ring needs at least two clients");
  }
  if (topology.kind != netmodel::TopologyKind::Ring) {
    throw UsageError("run_ring_round: topology is not a ring");
  }
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const std::size_t succ = (i + 1) % clients.size();
    if (topology.successor(clients[i].client_id) != clients[succ].client_id) {
      throw UsageError("run_ring_round: client order does not match the ring");
    }
  }
  RoundMetrics metrics = train_all_clients(clients, schedule, round_idx, run_seed);

  // Simultaneous hand-off: successor k+1 adapts the trained weights of k.
  const std::size_t k = clients.size();
  std::vector<vqc::WeightVector> next(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t succ = (i + 1) % k;
    ledger.send_weights(
        netmodel::Edge(clients[i].client_id, clients[succ].client_id),
        clients[i].last_trained.size());
    if (alignment == WeightAlignment::FlatPrefix) {
      next[succ] =
          ring_adapt_weights(clients[i].last_trained, clients[succ].last_trained);
    } else {
      next[succ] = ring_adapt_weights_per_layer(
          clients[i].last_trained, clients[i].shape(), clients[succ].last_trained,
          clients[succ].shape());
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    clients[i].weights = std::move(next[i]);
  }
  return metrics;
}

FinalEvaluation evaluate_final(const std::vector<ClientState>& clients) {
  FinalEvaluation eval;
  eval.per_client_accuracy.reserve(clients.size());
  double sum = 0.0;
  for (const ClientState& client : clients) {
    const vqc::EvalMetrics m = test_metrics(client);
    eval.per_client_accuracy.push_back(m.accuracy);
    sum += m.accuracy;
  }
  eval.aggregate = clients.empty() ? 0.0 : sum / static_cast<double>(clients.size());
  return eval;
}

}  // namespace qfl::fedcore
