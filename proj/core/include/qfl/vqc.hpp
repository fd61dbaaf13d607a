#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qfl/encode.hpp"
#include "qfl/qsim.hpp"

namespace qfl::vqc {

// Architecture of one client circuit: feature encoding followed by `depth`
// repetitions of a CNOT ring plus one RY rotation per qubit.
struct CircuitSpec {
  int num_qubits = 1;
  int depth = 0;
  encode::EmbeddingKind embedding = encode::EmbeddingKind::Angle;
  int num_features = 1;

  int weight_count() const { return depth * num_qubits; }
  void validate() const;
};

// Trainable rotation angles, flattened layer-major:
// index = layer * num_qubits + qubit.
using WeightVector = std::vector<double>;

struct Prediction {
  double prob_class1 = 0.0;
  int label = 0;
};

struct Sample {
  std::span<const double> features;
  int label = 0;
};

struct EvalMetrics {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

// Gate list of one layer: the CNOT ring 0->1->...->(n-1)->0 followed by
// RY(layer_weights[q]) on every qubit. A single-qubit circuit has no
// entangler, only the RY.
std::vector<qsim::GateOp> build_layer_ops(const CircuitSpec& spec,
                                          std::span<const double> layer_weights);

// Feature-encoded register before any trainable layer.
qsim::StateVector embed(const CircuitSpec& spec, std::span<const double> features);

// Full circuit evaluation from |0...0>.
qsim::StateVector run_circuit(const CircuitSpec& spec,
                              std::span<const double> weights,
                              std::span<const double> features);

// Readout: p(class 1) = (1 - <Z_0>) / 2, label = [p >= 0.5].
Prediction forward(const CircuitSpec& spec, std::span<const double> weights,
                   std::span<const double> features);

inline constexpr double kProbClip = 1e-7;

// Binary cross-entropy with the probability clipped to
// [kProbClip, 1 - kProbClip].
double loss(double prob_class1, int target_label);
double loss(const Prediction& pred, int target_label);

// Mean loss and accuracy of the current weights over a batch.
EvalMetrics evaluate(const CircuitSpec& spec, std::span<const double> weights,
                     std::span<const Sample> batch);

// d(mean loss)/d(theta) via the parameter-shift rule: each RY generator
// admits the exact two-point rule <Z>(t + pi/2) - <Z>(t - pi/2) over 2,
// chained with the analytic derivative of the clipped cross-entropy.
WeightVector gradient(const CircuitSpec& spec, std::span<const double> weights,
                      std::span<const Sample> batch);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n, AdamConfig cfg = {})
      : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam update, in place.
void sgd_adam_step(WeightVector& weights, std::span<const double> grad,
                   AdamState& state);

// Uniform[-0.1, 0.1] per weight, seeded.
WeightVector init_weights(std::size_t count, std::uint64_t seed);

}  // namespace qfl::vqc
