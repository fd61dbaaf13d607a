#include "qfl/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfl/errors.hpp"
#include "qfl/rng.hpp"

namespace qfl::trainers {

BaselineRun train_quantum_baseline(const vqc::CircuitSpec& spec,
                                   const data::ClientShard& shard,
                                   const fedcore::TrainSchedule& schedule,
                                   int rounds, std::uint64_t run_seed) {
  if (shard.train.size() == 0) {
    throw UsageError("train_quantum_baseline: empty train set");
  }
  fedcore::ClientState solo = fedcore::make_client(
      0, spec, shard,
      vqc::init_weights(static_cast<std::size_t>(spec.weight_count()),
                        rng::mix(run_seed, {rng::kWeightInit})),
      schedule.adam);

  BaselineRun run;
  run.rounds.reserve(static_cast<std::size_t>(rounds));
  std::vector<vqc::Sample> test_batch;
  test_batch.reserve(solo.shard.test.size());
  for (std::size_t i = 0; i < solo.shard.test.size(); ++i) {
    test_batch.push_back(
        vqc::Sample{solo.shard.test.features.row(i), solo.shard.test.labels[i]});
  }
  for (int r = 0; r < rounds; ++r) {
    fedcore::ClientRoundMetrics m =
        fedcore::local_train_round(solo, schedule, r, run_seed);
    const vqc::EvalMetrics test =
        vqc::evaluate(solo.spec, solo.last_trained, test_batch);
    m.test_loss = test.mean_loss;
    m.test_accuracy = test.accuracy;
    run.rounds.push_back(m);
  }
  run.final_weights = solo.last_trained;
  run.final_test_accuracy = run.rounds.empty() ? 0.0 : run.rounds.back().test_accuracy;
  return run;
}

int MlpSpec::parameter_count() const {
  int count = 0;
  int fan_in = input_dim;
  for (int h : hidden_dims) {
    count += (fan_in + 1) * h;
    fan_in = h;
  }
  count += fan_in + 1;  // logistic output unit
  return count;
}

void MlpSpec::validate() const {
  if (input_dim < 1) {
    throw ShapeError("MLP input_dim must be >= 1");
  }
  for (int h : hidden_dims) {
    if (h < 1) {
      throw ShapeError("MLP hidden layer width must be >= 1");
    }
  }
}

Mlp::Mlp(MlpSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  int fan_in = spec_.input_dim;
  std::size_t offset = 0;
  for (std::size_t l = 0; l <= spec_.hidden_dims.size(); ++l) {
    const int out = l < spec_.hidden_dims.size() ? spec_.hidden_dims[l] : 1;
    LayerDims dims;
    dims.in = fan_in;
    dims.out = out;
    dims.weight_offset = offset;
    offset += static_cast<std::size_t>(fan_in) * out;
    dims.bias_offset = offset;
    offset += static_cast<std::size_t>(out);
    layers_.push_back(dims);
    fan_in = out;
  }
  params_.resize(offset);
  rng::Prng prng(rng::mix(seed, {rng::kMlpInit}));
  for (double& p : params_) {
    p = prng.uniform(-0.1, 0.1);
  }
}

namespace {

double activate(double x, Activation a) {
  return a == Activation::ReLU ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

double activate_grad(double pre, Activation a) {
  if (a == Activation::ReLU) {
    return pre > 0.0 ? 1.0 : 0.0;
  }
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double> Mlp::layer_forward(std::span<const double> input,
                                       std::vector<std::vector<double>>* pre_acts,
                                       std::vector<std::vector<double>>* acts) const {
  if (input.size() != static_cast<std::size_t>(spec_.input_dim)) {
    throw ShapeError("MLP input length " + std::to_string(input.size()) +
                     " != input_dim " + std::to_string(spec_.input_dim));
  }
  std::vector<double> current(input.begin(), input.end());
  if (acts != nullptr) {
    acts->push_back(current);
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerDims& dims = layers_[l];
    std::vector<double> pre(static_cast<std::size_t>(dims.out));
    for (int o = 0; o < dims.out; ++o) {
      double z = params_[dims.bias_offset + o];
      const double* w =
          params_.data() + dims.weight_offset + static_cast<std::size_t>(o) * dims.in;
      for (int i = 0; i < dims.in; ++i) {
        z += w[i] * current[i];
      }
      pre[o] = z;
    }
    if (pre_acts != nullptr) {
      pre_acts->push_back(pre);
    }
    const bool is_output = l + 1 == layers_.size();
    current.resize(pre.size());
    for (std::size_t o = 0; o < pre.size(); ++o) {
      current[o] = is_output ? pre[o] : activate(pre[o], spec_.activation);
    }
    if (acts != nullptr && !is_output) {
      acts->push_back(current);
    }
  }
  return current;  // raw logit, length 1
}

double Mlp::predict_prob(std::span<const double> input) const {
  return sigmoid(layer_forward(input, nullptr, nullptr)[0]);
}

double Mlp::loss_and_gradient(std::span<const vqc::Sample> batch,
                              std::vector<double>& grad) const {
  if (batch.empty()) {
    throw UsageError("MLP gradient: empty batch");
  }
  grad.assign(params_.size(), 0.0);
  double loss_sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const vqc::Sample& s : batch) {
    std::vector<std::vector<double>> pre_acts;
    std::vector<std::vector<double>> acts;  // acts[l] = input to layer l
    const double logit = layer_forward(s.features, &pre_acts, &acts)[0];
    const double p = sigmoid(logit);
    loss_sum += vqc::loss(p, s.label);

    // dL/dlogit of sigmoid+BCE is p - y
    std::vector<double> delta{p - static_cast<double>(s.label)};
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const LayerDims& dims = layers_[li];
      const std::vector<double>& input = acts[li];
      std::vector<double> prev_delta(static_cast<std::size_t>(dims.in), 0.0);
      for (int o = 0; o < dims.out; ++o) {
        const double d = delta[o];
        const std::size_t w_base =
            dims.weight_offset + static_cast<std::size_t>(o) * dims.in;
        for (int i = 0; i < dims.in; ++i) {
          grad[w_base + i] += inv_n * d * input[i];
          prev_delta[i] += params_[w_base + i] * d;
        }
        grad[dims.bias_offset + o] += inv_n * d;
      }
      if (li > 0) {
        const std::vector<double>& pre = pre_acts[li - 1];
        for (int i = 0; i < dims.in; ++i) {
          prev_delta[i] *= activate_grad(pre[i], spec_.activation);
        }
        delta = std::move(prev_delta);
      }
    }
  }
  return loss_sum * inv_n;
}

vqc::EvalMetrics Mlp::evaluate(std::span<const vqc::Sample> batch) const {
  if (batch.empty()) {
    throw UsageError("MLP evaluate: empty batch");
  }
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const vqc::Sample& s : batch) {
    const double p = predict_prob(s.features);
    loss_sum += vqc::loss(p, s.label);
    correct += ((p >= 0.5 ? 1 : 0) == s.label) ? 1 : 0;
  }
  const double n = static_cast<double>(batch.size());
  return vqc::EvalMetrics{loss_sum / n, static_cast<double>(correct) / n};
}

BaselineRun train_mlp_baseline(const MlpSpec& spec, const data::ClientShard& shard,
                               const fedcore::TrainSchedule& schedule, int rounds,
                               std::uint64_t run_seed) {
  if (shard.train.size() == 0) {
    throw UsageError("train_mlp_baseline: empty train set");
  }
  Mlp model(spec, run_seed);
  vqc::AdamState optimizer(model.params().size(), schedule.adam);

  const data::Dataset& train = shard.train;
  const std::size_t per_epoch = schedule.samples_per_epoch == 0
                                    ? train.size()
                                    : std::min(schedule.samples_per_epoch, train.size());
  std::vector<vqc::Sample> test_batch;
  for (std::size_t i = 0; i < shard.test.size(); ++i) {
    test_batch.push_back(
        vqc::Sample{shard.test.features.row(i), shard.test.labels[i]});
  }

  BaselineRun run;
  std::vector<double> grad;
  for (int r = 0; r < rounds; ++r) {
    const std::uint64_t epoch_seed =
        rng::mix(run_seed, {rng::kMlpInit, static_cast<std::uint64_t>(r)});
    double loss_sum = 0.0;
    double correct_sum = 0.0;
    std::size_t seen = 0;
    for (int epoch = 0; epoch < schedule.epochs_per_round; ++epoch) {
      const std::vector<std::size_t> order = data::epoch_sample(
          train, per_epoch, epoch_seed, static_cast<std::uint64_t>(epoch));
      for (std::size_t begin = 0; begin < order.size();
           begin += static_cast<std::size_t>(schedule.batch_size)) {
        const std::size_t end = std::min(
            order.size(), begin + static_cast<std::size_t>(schedule.batch_size));
        std::vector<vqc::Sample> batch;
        batch.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          batch.push_back(vqc::Sample{train.features.row(order[i]),
                                      train.labels[order[i]]});
        }
        const vqc::EvalMetrics eval = model.evaluate(batch);
        loss_sum += eval.mean_loss * static_cast<double>(batch.size());
        correct_sum += eval.accuracy * static_cast<double>(batch.size());
        seen += batch.size();
        model.loss_and_gradient(batch, grad);
        vqc::sgd_adam_step(model.params(), grad, optimizer);
      }
    }
    fedcore::ClientRoundMetrics m;
    if (seen > 0) {
      m.train_loss = loss_sum / static_cast<double>(seen);
      m.train_accuracy = correct_sum / static_cast<double>(seen);
    }
    const vqc::EvalMetrics test = model.evaluate(test_batch);
    m.test_loss = test.mean_loss;
    m.test_accuracy = test.accuracy;
    run.rounds.push_back(m);
  }
  run.final_weights = model.params();
  run.final_test_accuracy = run.rounds.empty() ? 0.0 : run.rounds.back().test_accuracy;
  return run;
}

std::vector<fedcore::ClientRoundMetrics> aggregate_baseline_runs(
    const std::vector<std::vector<fedcore::ClientRoundMetrics>>& runs) {
  if (runs.empty()) {
    throw UsageError("aggregate_baseline_runs: no runs");
  }
  const std::size_t rounds = runs.front().size();
  for (const auto& run : runs) {
    if (run.size() != rounds) {
      throw UsageError("aggregate_baseline_runs: ragged round counts (" +
                       std::to_string(run.size()) + " vs " +
                       std::to_string(rounds) + ")");
    }
  }
  std::vector<fedcore::ClientRoundMetrics> mean(rounds);
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (std::size_t r = 0; r < rounds; ++r) {
    for (const auto& run : runs) {
      mean[r].train_loss += run[r].train_loss * inv;
      mean[r].train_accuracy += run[r].train_accuracy * inv;
      mean[r].test_loss += run[r].test_loss * inv;
      mean[r].test_accuracy += run[r].test_accuracy * inv;
    }
  }
  return mean;
}

}  // namespace qfl::trainers
