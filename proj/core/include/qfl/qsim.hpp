#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qfl::qsim {

using Amplitude = std::complex<double>;

// Dense n-qubit register. Qubit 0 is the least-significant bit of the
// amplitude index, so |q1 q0> = |10> lives at index 1.
struct StateVector {
  int num_qubits = 0;
  std::vector<Amplitude> amplitudes;

  std::size_t dim() const { return amplitudes.size(); }
};

enum class GateKind { RX, RY, CNOT };

struct GateOp {
  GateKind kind = GateKind::RX;
  int target = 0;
  int control = -1;    // CNOT only
  double angle = 0.0;  // rotations only

  static GateOp rx(int target, double angle) {
    return {GateKind::RX, target, -1, angle};
  }
  static GateOp ry(int target, double angle) {
    return {GateKind::RY, target, -1, angle};
  }
  static GateOp cnot(int control, int target) {
    return {GateKind::CNOT, target, control, 0.0};
  }
};

// Dense simulation above this size exceeds the desk-scale memory budget.
inline constexpr int kMaxQubits = 24;

// |0...0> register. Throws CapacityError outside [1, kMaxQubits].
StateVector zero_state(int num_qubits);

// In-place unitary application with stride arithmetic; no full matrix is
// ever materialized. RX(a) = exp(-i a X / 2), RY(a) = exp(-i a Y / 2).
void apply_gate(StateVector& state, const GateOp& gate);

void apply_circuit(StateVector& state, std::span<const GateOp> ops);

// Exact <Z> on one qubit: sum of |amp|^2 signed by the qubit's bit value.
double expectation_z(const StateVector& state, int qubit);

double l2_norm(const StateVector& state);

// Records the worst |l2_norm - 1| seen by the model evaluation paths since
// the last reset. Thread-safe; used by the norm-conservation checks.
namespace norm_watch {
void record(double deviation);
double worst();
void reset();
}  // namespace norm_watch

}  // namespace qfl::qsim
