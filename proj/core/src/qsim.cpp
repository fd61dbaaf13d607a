#include "qfl/qsim.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <utility>

#include "qfl/errors.hpp"

namespace qfl::qsim {

namespace {

void check_qubit(const StateVector& state, int qubit, const char* what) {
  if (qubit < 0 || qubit >= state.num_qubits) {
    throw IndexError(std::string(what) + " index " + std::to_string(qubit) +
                     " out of range for " + std::to_string(state.num_qubits) +
                     "-qubit state");
  }
}

void apply_single_qubit(StateVector& state, int qubit, Amplitude u00,
                        Amplitude u01, Amplitude u10, Amplitude u11) {
  const std::size_t mask = std::size_t{1} << qubit;
  const std::size_t dim = state.dim();
  Amplitude* amps = state.amplitudes.data();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & mask) == 0) {
      const std::size_t j = i | mask;
      const Amplitude a = amps[i];
      const Amplitude b = amps[j];
      amps[i] = u00 * a + u01 * b;
      amps[j] = u10 * a + u11 * b;
    }
  }
}

}  // namespace

StateVector zero_state(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw CapacityError("zero_state: num_qubits must be in [1, " +
                        std::to_string(kMaxQubits) + "], got " +
                        std::to_string(num_qubits));
  }
  StateVector state;
  state.num_qubits = num_qubits;
  state.amplitudes.assign(std::size_t{1} << num_qubits, Amplitude{});
  state.amplitudes[0] = Amplitude{1.0, 0.0};
  return state;
}

void apply_gate(StateVector& state, const GateOp& gate) {
  switch (gate.kind) {
    case GateKind::RX: {
      check_qubit(state, gate.target, "RX target");
      const double h = 0.5 * gate.angle;
      const Amplitude c{std::cos(h), 0.0};
      const Amplitude ms{0.0, -std::sin(h)};
      apply_single_qubit(state, gate.target, c, ms, ms, c);
      break;
    }
    case GateKind::RY: {
      check_qubit(state, gate.target, "RY target");
      const double h = 0.5 * gate.angle;
      const Amplitude c{std::cos(h), 0.0};
      const Amplitude s{std::sin(h), 0.0};
      apply_single_qubit(state, gate.target, c, -s, s, c);
      break;
    }
    case GateKind::CNOT: {
      check_qubit(state, gate.target, "CNOT target");
      check_qubit(state, gate.control, "CNOT control");
      if (gate.control == gate.target) {
        throw IndexError("CNOT control equals target (" +
                         std::to_string(gate.target) + ")");
      }
      const std::size_t cmask = std::size_t{1} << gate.control;
      const std::size_t tmask = std::size_t{1} << gate.target;
      const std::size_t dim = state.dim();
      Amplitude* amps = state.amplitudes.data();
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cmask) != 0 && (i & tmask) == 0) {
          std::swap(amps[i], amps[i | tmask]);
        }
      }
      break;
    }
  }
}

void apply_circuit(StateVector& state, std::span<const GateOp> ops) {
  for (const GateOp& op : ops) {
    apply_gate(state, op);
  }
}

double expectation_z(const StateVector& state, int qubit) {
  check_qubit(state, qubit, "expectation_z");
  const std::size_t mask = std::size_t{1} << qubit;
  const std::size_t dim = state.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double p = std::norm(state.amplitudes[i]);
    acc += (i & mask) ? -p : p;
  }
  return acc;
}

double l2_norm(const StateVector& state) {
  double sum = 0.0;
  for (const Amplitude& a : state.amplitudes) {
    sum += std::norm(a);
  }
  return std::sqrt(sum);
}

namespace norm_watch {

namespace {
std::atomic<double> g_worst{0.0};
}

void record(double deviation) {
  double current = g_worst.load(std::memory_order_relaxed);
  while (deviation > current &&
         !g_worst.compare_exchange_weak(current, deviation,
                                        std::memory_order_relaxed)) {
  }
}

double worst() { return g_worst.load(std::memory_order_relaxed); }

void reset() { g_worst.store(0.0, std::memory_order_relaxed); }

}  // namespace norm_watch

}  // namespace qfl::qsim
