#include "qfl/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfl/errors.hpp"
#include "qfl/rng.hpp"

namespace qfl::vqc {

namespace {

constexpr double kHalfPi = 1.57079632679489661923;

void check_weights(const CircuitSpec& spec, std::span<const double> weights) {
  if (weights.size() != static_cast<std::size_t>(spec.weight_count())) {
    throw ShapeError("weight vector length " + std::to_string(weights.size()) +
                     " does not match depth*qubits = " +
                     std::to_string(spec.weight_count()));
  }
}

void apply_layers(qsim::StateVector& state, const CircuitSpec& spec,
                  std::span<const double> weights) {
  const int n = spec.num_qubits;
  for (int layer = 0; layer < spec.depth; ++layer) {
    if (n >= 2) {
      for (int q = 0; q < n; ++q) {
        qsim::apply_gate(state, qsim::GateOp::cnot(q, (q + 1) % n));
      }
    }
    for (int q = 0; q < n; ++q) {
      qsim::apply_gate(state, qsim::GateOp::ry(q, weights[layer * n + q]));
    }
  }
  qsim::norm_watch::record(std::abs(qsim::l2_norm(state) - 1.0));
}

// <Z_0> after applying the trainable layers to a copy of the embedded state.
double z0_from_embedded(const CircuitSpec& spec, std::span<const double> weights,
                        const qsim::StateVector& embedded) {
  qsim::StateVector state = embedded;
  apply_layers(state, spec, weights);
  return qsim::expectation_z(state, 0);
}

double prob_from_z(double z0) {
  return std::clamp(0.5 * (1.0 - z0), 0.0, 1.0);
}

// Derivative of the clipped BCE w.r.t. <Z_0>. Zero in the clipped region,
// where the loss is flat in the parameters.
double dloss_dz(double prob, int target_label) {
  if (prob <= kProbClip || prob >= 1.0 - kProbClip) {
    return 0.0;
  }
  const double y = static_cast<double>(target_label);
  const double dl_dp = (prob - y) / (prob * (1.0 - prob));
  return -0.5 * dl_dp;
}

}  // namespace

void CircuitSpec::validate() const {
  if (num_qubits < 1 || num_qubits > qsim::kMaxQubits) {
    throw CapacityError("circuit qubit count " + std::to_string(num_qubits) +
                        " outside [1, " + std::to_string(qsim::kMaxQubits) + "]");
  }
  if (depth < 0) {
    throw UsageError("circuit depth must be >= 0");
  }
  encode::validate_embedding(embedding, num_features, num_qubits);
}

std::vector<qsim::GateOp> build_layer_ops(const CircuitSpec& spec,
                                          std::span<const double> layer_weights) {
  if (layer_weights.size() != static_cast<std::size_t>(spec.num_qubits)) {
    throw ShapeError("layer weights length " + std::to_string(layer_weights.size()) +
                     " != num_qubits " + std::to_string(spec.num_qubits));
  }
  std::vector<qsim::GateOp> ops;
  const int n = spec.num_qubits;
  ops.reserve(n >= 2 ? 2 * static_cast<std::size_t>(n) : 1);
  if (n >= 2) {
    for (int q = 0; q < n; ++q) {
      ops.push_back(qsim::GateOp::cnot(q, (q + 1) % n));
    }
  }
  for (int q = 0; q < n; ++q) {
    ops.push_back(qsim::GateOp::ry(q, layer_weights[q]));
  }
  return ops;
}

qsim::StateVector embed(const CircuitSpec& spec, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(spec.num_features)) {
    throw ShapeError("feature length " + std::to_string(features.size()) +
                     " != spec.num_features " + std::to_string(spec.num_features));
  }
  if (spec.embedding == encode::EmbeddingKind::Angle) {
    return encode::angle_embed(features, spec.num_qubits);
  }
  return encode::amplitude_embed(features, spec.num_qubits);
}

qsim::StateVector run_circuit(const CircuitSpec& spec,
                              std::span<const double> weights,
                              std::span<const double> features) {
  check_weights(spec, weights);
  qsim::StateVector state = embed(spec, features);
  apply_layers(state, spec, weights);
  return state;
}

Prediction forward(const CircuitSpec& spec, std::span<const double> weights,
                   std::span<const double> features) {
  const qsim::StateVector state = run_circuit(spec, weights, features);
  const double p = prob_from_z(qsim::expectation_z(state, 0));
  return Prediction{p, p >= 0.5 ? 1 : 0};
}

double loss(double prob_class1, int target_label) {
  const double p = std::clamp(prob_class1, kProbClip, 1.0 - kProbClip);
  if (target_label == 1) {
    return -std::log(p);
  }
  return -std::log(1.0 - p);
}

double loss(const Prediction& pred, int target_label) {
  return loss(pred.prob_class1, target_label);
}

EvalMetrics evaluate(const CircuitSpec& spec, std::span<const double> weights,
                     std::span<const Sample> batch) {
  if (batch.empty()) {
    throw UsageError("evaluate: empty batch");
  }
  check_weights(spec, weights);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const Sample& s : batch) {
    const Prediction pred = forward(spec, weights, s.features);
    loss_sum += loss(pred, s.label);
    correct += (pred.label == s.label) ? 1 : 0;
  }
  const double n = static_cast<double>(batch.size());
  return EvalMetrics{loss_sum / n, static_cast<double>(correct) / n};
}

WeightVector gradient(const CircuitSpec& spec, std::span<const double> weights,
                      std::span<const Sample> batch) {
  if (batch.empty()) {
    throw UsageError("gradient: empty batch");
  }
  check_weights(spec, weights);
  const std::size_t count = weights.size();
  WeightVector grad(count, 0.0);
  WeightVector shifted(weights.begin(), weights.end());
  for (const Sample& s : batch) {
    const qsim::StateVector base = embed(spec, s.features);
    const double z0 = z0_from_embedded(spec, weights, base);
    const double chain = dloss_dz(prob_from_z(z0), s.label);
    if (chain == 0.0) {
      continue;
    }
    for (std::size_t k = 0; k < count; ++k) {
      shifted[k] = weights[k] + kHalfPi;
      const double z_plus = z0_from_embedded(spec, shifted, base);
      shifted[k] = weights[k] - kHalfPi;
      const double z_minus = z0_from_embedded(spec, shifted, base);
      shifted[k] = weights[k];
      grad[k] += chain * 0.5 * (z_plus - z_minus);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) {
    g *= inv_n;
  }
  return grad;
}

void sgd_adam_step(WeightVector& weights, std::span<const double> grad,
                   AdamState& state) {
  const std::size_t n = weights.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw ShapeError("adam step: weights/gradient/state length mismatch");
  }
  state.step += 1;
  const AdamConfig& cfg = state.config;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    weights[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

WeightVector init_weights(std::size_t count, std::uint64_t seed) {
  rng::Prng prng(seed);
  WeightVector weights(count);
  for (double& w : weights) {
    w = prng.uniform(-0.1, 0.1);
  }
  return weights;
}

}  // namespace qfl::vqc
