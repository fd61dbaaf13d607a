#include <doctest.h>

#include <cmath>
#include <vector>

#include "qfl/errors.hpp"
#include "qfl/netmodel.hpp"
#include "qfl/rng.hpp"
#include "qfl/trainers.hpp"

using namespace qfl;

namespace {

constexpr double kPi = 3.14159265358979323846;

data::ClientShard separable_shard() {
  data::Dataset train;
  train.name = "separable";
  train.features = Matrix(4, 2);
  const double rows[4][2] = {{0.0, 0.0}, {0.2, 0.1}, {1.0, 1.0}, {0.9, 0.8}};
  const int labels[4] = {0, 0, 1, 1};
  for (std::size_t r = 0; r < 4; ++r) {
    train.features.at(r, 0) = rows[r][0];
    train.features.at(r, 1) = rows[r][1];
    train.labels.push_back(labels[r]);
  }
  data::ClientShard shard;
  shard.train = train;
  shard.test = train;
  return shard;
}

data::ClientShard angle_toy_shard() {
  data::Dataset train;
  train.name = "angle_toy";
  train.features = Matrix(8, 1);
  for (std::size_t r = 0; r < 8; ++r) {
    train.features.at(r, 0) = (r % 2 == 0) ? 0.0 : kPi;
    train.labels.push_back(static_cast<int>(r % 2));
  }
  data::ClientShard shard;
  shard.train = train;
  shard.test = train;
  return shard;
}

}  // namespace

TEST_CASE("quantum baseline equals a one-client star federation bitwise") {
  const vqc::CircuitSpec spec{1, 2, encode::EmbeddingKind::Angle, 1};
  const data::ClientShard shard = angle_toy_shard();
  fedcore::TrainSchedule schedule;
  schedule.batch_size = 4;
  const std::uint64_t seed = 21;
  const int rounds = 4;

  const trainers::BaselineRun solo =
      trainers::train_quantum_baseline(spec, shard, schedule, rounds, seed);

  // the same training driven through the star machinery
  const netmodel::NetworkTopology topology =
      netmodel::build_star(std::vector<int>{1}, 1);
  netmodel::LinkLedger ledger(topology);
  std::vector<fedcore::ClientState> clients{fedcore::make_client(
      0, spec, shard,
      vqc::init_weights(static_cast<std::size_t>(spec.weight_count()),
                        rng::mix(seed, {rng::kWeightInit})),
      schedule.adam)};
  vqc::WeightVector global =
      vqc::init_weights(static_cast<std::size_t>(spec.weight_count()),
                        rng::mix(seed, {rng::kWeightInit}));
  fedcore::distribute_to_clients(global, clients,
                                 fedcore::WeightAlignment::FlatPrefix);
  for (int r = 0; r < rounds; ++r) {
    const fedcore::RoundMetrics metrics = fedcore::run_star_round(
        clients, global, topology, ledger, schedule, r, seed,
        fedcore::WeightAlignment::FlatPrefix);
    CHECK(metrics.clients[0].train_loss == solo.rounds[static_cast<std::size_t>(r)].train_loss);
    CHECK(metrics.clients[0].train_accuracy ==
          solo.rounds[static_cast<std::size_t>(r)].train_accuracy);
    CHECK(metrics.clients[0].test_accuracy ==
          solo.rounds[static_cast<std::size_t>(r)].test_accuracy);
  }
  CHECK(clients[0].last_trained == solo.final_weights);
}

TEST_CASE("logistic regression solves the separable toy set") {
  const trainers::MlpSpec spec{2, {}, trainers::Activation::ReLU};
  CHECK(spec.parameter_count() == 3);
  fedcore::TrainSchedule schedule;
  schedule.batch_size = 4;
  const trainers::BaselineRun run =
      trainers::train_mlp_baseline(spec, separable_shard(), schedule, 200, 3);
  CHECK(run.rounds.back().train_accuracy == doctest::Approx(1.0));
}

TEST_CASE("mlp parameter counts") {
  const trainers::MlpSpec image{784, {64}, trainers::Activation::ReLU};
  CHECK(image.parameter_count() == (784 + 1) * 64 + 65);
  const trainers::MlpSpec moons{2, {32}, trainers::Activation::ReLU};
  CHECK(moons.parameter_count() == 3 * 32 + 33);
}

TEST_CASE("zeroed parameters output probability one half") {
  trainers::Mlp model(trainers::MlpSpec{3, {5}, trainers::Activation::Tanh}, 1);
  for (double& p : model.params()) {
    p = 0.0;
  }
  const std::vector<double> x{0.4, -1.0, 2.5};
  CHECK(model.predict_prob(x) == doctest::Approx(0.5));
}

TEST_CASE("mlp backprop matches finite differences") {
  rng::Prng prng(0x71);
  for (const trainers::Activation activation :
       {trainers::Activation::ReLU, trainers::Activation::Tanh}) {
    trainers::MlpSpec spec{3, {4, 3}, activation};
    trainers::Mlp model(spec, prng.next_u64());

    std::vector<std::vector<double>> rows;
    std::vector<vqc::Sample> batch;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> row{prng.uniform(-1.0, 1.0), prng.uniform(-1.0, 1.0),
                              prng.uniform(-1.0, 1.0)};
      rows.push_back(std::move(row));
    }
    for (const auto& row : rows) {
      batch.push_back(vqc::Sample{row, static_cast<int>(prng.next_below(2))});
    }

    std::vector<double> grad;
    model.loss_and_gradient(batch, grad);

    const double h = 1e-4;
    for (std::size_t k = 0; k < model.params().size(); ++k) {
      const double original = model.params()[k];
      model.params()[k] = original + h;
      const double up = model.evaluate(batch).mean_loss;
      model.params()[k] = original - h;
      const double down = model.evaluate(batch).mean_loss;
      model.params()[k] = original;
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(grad[k] - fd) < 1e-5);
    }
  }
}

TEST_CASE("mlp loss is non-increasing over the first epochs on the toy set") {
  const trainers::MlpSpec spec{2, {8}, trainers::Activation::ReLU};
  fedcore::TrainSchedule schedule;
  schedule.batch_size = 16;  // full batch
  const trainers::BaselineRun run =
      trainers::train_mlp_baseline(spec, separable_shard(), schedule, 5, 11);
  for (std::size_t r = 1; r < run.rounds.size(); ++r) {
    CHECK(run.rounds[r].train_loss <= run.rounds[r - 1].train_loss + 1e-12);
  }
}

TEST_CASE("baseline aggregation is a per-round mean") {
  fedcore::ClientRoundMetrics a;
  a.train_loss = 0.4;
  a.train_accuracy = 0.8;
  a.test_accuracy = 0.8;
  fedcore::ClientRoundMetrics b = a;
  b.train_accuracy = 1.0;
  b.test_accuracy = 1.0;

  const auto identity = trainers::aggregate_baseline_runs({{a, a}});
  CHECK(identity.size() == 2);
  CHECK(identity[0].train_accuracy == doctest::Approx(0.8));

  const auto mean = trainers::aggregate_baseline_runs({{a}, {b}});
  REQUIRE(mean.size() == 1);
  CHECK(mean[0].train_accuracy == doctest::Approx(0.9));
  CHECK(mean[0].test_accuracy == doctest::Approx(0.9));

  CHECK_THROWS_AS(trainers::aggregate_baseline_runs({{a}, {a, a}}), UsageError);
  CHECK_THROWS_AS(trainers::aggregate_baseline_runs({}), UsageError);
}
