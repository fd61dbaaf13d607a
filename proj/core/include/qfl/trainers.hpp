#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qfl/fedcore.hpp"

namespace qfl::trainers {

// Per-round curve of one non-federated run.
struct BaselineRun {
  std::vector<fedcore::ClientRoundMetrics> rounds;
  vqc::WeightVector final_weights;
  double final_test_accuracy = 0.0;
};

// Solo VQC trained on the full shard with the same loss/optimizer and the
// same seeded streams as a federated client with id 0. A one-client star
// federation reproduces this run bitwise.
BaselineRun train_quantum_baseline(const vqc::CircuitSpec& spec,
                                   const data::ClientShard& shard,
                                   const fedcore::TrainSchedule& schedule,
                                   int rounds, std::uint64_t run_seed);

enum class Activation { ReLU, Tanh };

// Dense binary classifier: hidden layers with the chosen activation and a
// single logistic output unit.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  Activation activation = Activation::ReLU;

  int parameter_count() const;
  void validate() const;
};

class Mlp {
 public:
  Mlp(MlpSpec spec, std::uint64_t seed);

  double predict_prob(std::span<const double> input) const;

  // Mean BCE loss over the batch; accumulates d(mean loss)/d(params) into
  // grad (sized parameter_count, zeroed here).
  double loss_and_gradient(std::span<const vqc::Sample> batch,
                           std::vector<double>& grad) const;

  vqc::EvalMetrics evaluate(std::span<const vqc::Sample> batch) const;

  const std::vector<double>& params() const { return params_; }
  std::vector<double>& params() { return params_; }
  const MlpSpec& spec() const { return spec_; }

 private:
  struct LayerDims {
    int in = 0;
    int out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
  };

  std::vector<double> layer_forward(std::span<const double> input,
                                    std::vector<std::vector<double>>* pre_acts,
                                    std::vector<std::vector<double>>* acts) const;

  MlpSpec spec_;
  std::vector<LayerDims> layers_;
  std::vector<double> params_;  // [W0, b0, W1, b1, ...], W row-major (out x in)
};

// Mini-batch Adam training of the MLP on the shard, mirroring the
// federated schedule so the curves are comparable.
BaselineRun train_mlp_baseline(const MlpSpec& spec, const data::ClientShard& shard,
                               const fedcore::TrainSchedule& schedule, int rounds,
                               std::uint64_t run_seed);

// Per-round unweighted mean across runs (tasks x seeds). All runs must
// have the same number of rounds.
std::vector<fedcore::ClientRoundMetrics> aggregate_baseline_runs(
    const std::vector<std::vector<fedcore::ClientRoundMetrics>>& runs);

}  // namespace qfl::trainers
