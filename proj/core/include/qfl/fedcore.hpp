#pragma once

#include <cstdint>
#include <vector>

#include "qfl/data.hpp"
#include "qfl/netmodel.hpp"
#include "qfl/vqc.hpp"

namespace qfl::fedcore {

// How weight vectors of different lengths line up during aggregation and
// ring hand-off. FlatPrefix follows the flat "first n weights" rule;
// PerLayer aligns (layer, qubit) cells instead.
enum class WeightAlignment { FlatPrefix, PerLayer };

struct WeightShape {
  int depth = 0;
  int qubits = 0;
};

struct TrainSchedule {
  int epochs_per_round = 1;
  int batch_size = 16;
  std::size_t samples_per_epoch = 0;  // 0 = full shard every epoch
  vqc::AdamConfig adam;
};

struct ClientState {
  int client_id = 0;
  vqc::CircuitSpec spec;
  vqc::WeightVector weights;  // start-of-round weights (post exchange)
  vqc::AdamState optimizer;
  data::ClientShard shard;
  // weights right after this client's most recent local training, i.e. the
  // "final parameters after training" used for test evaluation
  vqc::WeightVector last_trained;

  WeightShape shape() const { return {spec.depth, spec.num_qubits}; }
};

ClientState make_client(int client_id, const vqc::CircuitSpec& spec,
                        data::ClientShard shard, vqc::WeightVector initial_weights,
                        vqc::AdamConfig adam);

struct ClientRoundMetrics {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

struct RoundMetrics {
  int round_idx = 0;
  std::vector<ClientRoundMetrics> clients;
  double mean_train_loss = 0.0;
  double mean_train_accuracy = 0.0;
  double mean_test_accuracy = 0.0;
};

// One local phase: epochs_per_round epochs of mini-batch Adam over the
// (sub)sampled train shard. Train metrics are the running mean of the
// pre-update batch evaluations. Deterministic in (run_seed, client_id,
// round_idx, epoch).
ClientRoundMetrics local_train_round(ClientState& client,
                                     const TrainSchedule& schedule, int round_idx,
                                     std::uint64_t run_seed);

// Positionwise mean over the clients whose vector is long enough; the
// global length is the maximum client length.
vqc::WeightVector aggregate_star(const std::vector<vqc::WeightVector>& client_weights);

// First client_len entries of the global vector.
vqc::WeightVector distribute_star(const vqc::WeightVector& global,
                                  std::size_t client_len);

// Ring adjustment: truncate to the receiver's length, or append the
// receiver's own previous weights where the incoming vector is short.
vqc::WeightVector ring_adapt_weights(const vqc::WeightVector& incoming,
                                     const vqc::WeightVector& own_previous);

// Per-layer variants of the three rules above. Cell (l, q) aligns across
// clients; missing cells fall back the same way as the flat rules.
vqc::WeightVector aggregate_star_per_layer(
    const std::vector<vqc::WeightVector>& client_weights,
    const std::vector<WeightShape>& shapes, WeightShape global_shape);
vqc::WeightVector distribute_star_per_layer(const vqc::WeightVector& global,
                                            WeightShape global_shape,
                                            WeightShape client_shape);
vqc::WeightVector ring_adapt_weights_per_layer(const vqc::WeightVector& incoming,
                                               WeightShape incoming_shape,
                                               const vqc::WeightVector& own_previous,
                                               WeightShape own_shape);

// The shape a star aggregator uses: max depth and max qubit count.
WeightShape global_shape_of(const std::vector<ClientState>& clients);

// Sets every client's start weights from the global model (star init and
// per-round distribution share this).
void distribute_to_clients(const vqc::WeightVector& global,
                           std::vector<ClientState>& clients,
                           WeightAlignment alignment);

// Local training on every client, aggregation into the global model, and
// redistribution; 2k ledger messages for k clients.
RoundMetrics run_star_round(std::vector<ClientState>& clients,
                            vqc::WeightVector& global,
                            const netmodel::NetworkTopology& topology,
                            netmodel::LinkLedger& ledger,
                            const TrainSchedule& schedule, int round_idx,
                            std::uint64_t run_seed, WeightAlignment alignment);

// Local training, then simultaneous hand-offs at the round barrier: each
// client's next-round weights adapt its predecessor's trained weights;
// k ledger messages for k clients.
RoundMetrics run_ring_round(std::vector<ClientState>& clients,
                            const netmodel::NetworkTopology& topology,
                            netmodel::LinkLedger& ledger,
                            const TrainSchedule& schedule, int round_idx,
                            std::uint64_t run_seed, WeightAlignment alignment);

struct FinalEvaluation {
  std::vector<double> per_client_accuracy;
  double aggregate = 0.0;  // unweighted mean
};

// Per-client accuracy on the client's own test split, using the final
// parameters after training (not the post-exchange weights).
FinalEvaluation evaluate_final(const std::vector<ClientState>& clients);

}  // namespace qfl::fedcore
