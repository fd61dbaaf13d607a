#include <benchmark/benchmark.h>

#include "qfl/data.hpp"
#include "qfl/fedcore.hpp"
#include "qfl/rng.hpp"
#include "qfl/vqc.hpp"

using namespace qfl;

namespace {

constexpr double kPi = 3.14159265358979323846;

void BM_ApplyGateChain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  qsim::StateVector sv = qsim::zero_state(n);
  for (auto _ : state) {
    for (int q = 0; q < n; ++q) {
      qsim::apply_gate(sv, qsim::GateOp::ry(q, 0.3));
    }
    for (int q = 0; q < n; ++q) {
      qsim::apply_gate(sv, qsim::GateOp::cnot(q, (q + 1) % n));
    }
    benchmark::DoNotOptimize(sv.amplitudes.data());
  }
  state.SetComplexityN(1 << n);
}
BENCHMARK(BM_ApplyGateChain)->DenseRange(4, 16, 4)->Complexity();

void BM_ForwardMoonsCircuit(benchmark::State& state) {
  const vqc::CircuitSpec spec{2, 8, encode::EmbeddingKind::Angle, 2};
  const vqc::WeightVector weights = vqc::init_weights(16, 7);
  const std::vector<double> features{0.4, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(vqc::forward(spec, weights, features).prob_class1);
  }
}
BENCHMARK(BM_ForwardMoonsCircuit);

void BM_ForwardImageCircuit(benchmark::State& state) {
  const vqc::CircuitSpec spec{10, 10, encode::EmbeddingKind::Amplitude, 784};
  const vqc::WeightVector weights = vqc::init_weights(100, 7);
  std::vector<double> features(784);
  rng::Prng prng(3);
  for (double& f : features) {
    f = prng.uniform01() + 0.01;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(vqc::forward(spec, weights, features).prob_class1);
  }
}
BENCHMARK(BM_ForwardImageCircuit);

void BM_ParameterShiftGradient(benchmark::State& state) {
  const vqc::CircuitSpec spec{2, 8, encode::EmbeddingKind::Angle, 2};
  const vqc::WeightVector weights = vqc::init_weights(16, 9);
  rng::Prng prng(5);
  std::vector<std::vector<double>> rows;
  std::vector<vqc::Sample> batch;
  for (int i = 0; i < 16; ++i) {
    rows.push_back({prng.uniform(0.0, kPi), prng.uniform(0.0, kPi)});
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    batch.push_back(vqc::Sample{rows[i], static_cast<int>(i % 2)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(vqc::gradient(spec, weights, batch).data());
  }
}
BENCHMARK(BM_ParameterShiftGradient);

void BM_AggregateStar(benchmark::State& state) {
  rng::Prng prng(11);
  std::vector<vqc::WeightVector> ws;
  for (std::size_t len : {40, 60, 100, 100}) {
    vqc::WeightVector w(len);
    for (double& v : w) {
      v = prng.uniform(-1.0, 1.0);
    }
    ws.push_back(std::move(w));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fedcore::aggregate_star(ws).data());
  }
}
BENCHMARK(BM_AggregateStar);

void BM_BilinearResize(benchmark::State& state) {
  rng::Prng prng(13);
  std::vector<double> img(28 * 28);
  for (double& v : img) {
    v = prng.uniform01();
  }
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        data::resize_image(img.data(), 28, 28, side, side).data());
  }
}
BENCHMARK(BM_BilinearResize)->Arg(4)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
