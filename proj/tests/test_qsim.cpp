#include <doctest.h>

#include <cmath>

#include "qfl/errors.hpp"
#include "qfl/qsim.hpp"
#include "support/oracles.hpp"

using namespace qfl;
using qsim::GateOp;
using qsim::StateVector;

namespace {
constexpr double kPi = 3.14159265358979323846;

double max_abs_diff(const StateVector& a, const StateVector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    worst = std::max(worst, std::abs(a.amplitudes[i] - b.amplitudes[i]));
  }
  return worst;
}
}  // namespace

TEST_CASE("zero_state basis states") {
  const StateVector one = qsim::zero_state(1);
  REQUIRE(one.dim() == 2);
  CHECK(one.amplitudes[0] == qsim::Amplitude{1.0, 0.0});
  CHECK(one.amplitudes[1] == qsim::Amplitude{0.0, 0.0});

  const StateVector two = qsim::zero_state(2);
  REQUIRE(two.dim() == 4);
  CHECK(two.amplitudes[0] == qsim::Amplitude{1.0, 0.0});
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(two.amplitudes[i] == qsim::Amplitude{0.0, 0.0});
  }

  const StateVector ten = qsim::zero_state(10);
  CHECK(ten.dim() == 1024);
  CHECK(qsim::l2_norm(ten) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero_state capacity bounds") {
  CHECK_THROWS_AS(qsim::zero_state(0), CapacityError);
  CHECK_THROWS_AS(qsim::zero_state(-3), CapacityError);
  CHECK_THROWS_AS(qsim::zero_state(qsim::kMaxQubits + 1), CapacityError);
}

TEST_CASE("RX(pi) maps |0> to -i|1>") {
  StateVector state = qsim::zero_state(1);
  qsim::apply_gate(state, GateOp::rx(0, kPi));
  CHECK(std::abs(state.amplitudes[0]) < 1e-15);
  CHECK(std::abs(state.amplitudes[1] - qsim::Amplitude{0.0, -1.0}) < 1e-15);
}

TEST_CASE("RY(pi/2) makes the equal superposition") {
  StateVector state = qsim::zero_state(1);
  qsim::apply_gate(state, GateOp::ry(0, kPi / 2.0));
  const double inv_sqrt2 = std::sqrt(0.5);
  CHECK(std::abs(state.amplitudes[0] - qsim::Amplitude{inv_sqrt2, 0.0}) < 1e-15);
  CHECK(std::abs(state.amplitudes[1] - qsim::Amplitude{inv_sqrt2, 0.0}) < 1e-15);
}

TEST_CASE("CNOT truth table: |10> -> |11>") {
  // |q0=1, q1=0> is amplitude index 1 (qubit 0 = LSB)
  StateVector state = qsim::zero_state(2);
  state.amplitudes[0] = {0.0, 0.0};
  state.amplitudes[1] = {1.0, 0.0};
  qsim::apply_gate(state, GateOp::cnot(0, 1));
  CHECK(state.amplitudes[3] == qsim::Amplitude{1.0, 0.0});
  CHECK(std::abs(state.amplitudes[1]) == 0.0);

  // control clear: |01> (= index 2) stays put
  StateVector idle = qsim::zero_state(2);
  idle.amplitudes[0] = {0.0, 0.0};
  idle.amplitudes[2] = {1.0, 0.0};
  qsim::apply_gate(idle, GateOp::cnot(0, 1));
  CHECK(idle.amplitudes[2] == qsim::Amplitude{1.0, 0.0});
}

TEST_CASE("expectation_z on basis and superposition states") {
  StateVector zero = qsim::zero_state(1);
  CHECK(qsim::expectation_z(zero, 0) == doctest::Approx(1.0));

  StateVector one = qsim::zero_state(1);
  qsim::apply_gate(one, GateOp::rx(0, kPi));
  CHECK(qsim::expectation_z(one, 0) == doctest::Approx(-1.0).epsilon(1e-12));

  StateVector plus = qsim::zero_state(1);
  qsim::apply_gate(plus, GateOp::ry(0, kPi / 2.0));
  CHECK(std::abs(qsim::expectation_z(plus, 0)) < 1e-15);
}

TEST_CASE("gate index validation") {
  StateVector state = qsim::zero_state(2);
  CHECK_THROWS_AS(qsim::apply_gate(state, GateOp::rx(2, 0.1)), IndexError);
  CHECK_THROWS_AS(qsim::apply_gate(state, GateOp::ry(-1, 0.1)), IndexError);
  CHECK_THROWS_AS(qsim::apply_gate(state, GateOp::cnot(1, 1)), IndexError);
  CHECK_THROWS_AS(qsim::apply_gate(state, GateOp::cnot(2, 0)), IndexError);
  CHECK_THROWS_AS(qsim::expectation_z(state, 5), IndexError);
}

TEST_CASE("unitarity spot checks: inverse pairs restore the state") {
  rng::Prng prng(0x5eed);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(prng.next_below(4));
    StateVector state = qsim::zero_state(n);
    const auto prep = testsupport::random_circuit(prng, n, 6);
    qsim::apply_circuit(state, prep);
    const StateVector before = state;

    const double phi = prng.uniform(-3.0, 3.0);
    const int q = static_cast<int>(prng.next_below(n));
    qsim::apply_gate(state, GateOp::rx(q, phi));
    qsim::apply_gate(state, GateOp::rx(q, -phi));
    CHECK(max_abs_diff(before, state) < 1e-12);

    qsim::apply_gate(state, GateOp::ry(q, phi));
    qsim::apply_gate(state, GateOp::ry(q, -phi));
    CHECK(max_abs_diff(before, state) < 1e-12);

    if (n >= 2) {
      int c = static_cast<int>(prng.next_below(n));
      while (c == q) {
        c = static_cast<int>(prng.next_below(n));
      }
      qsim::apply_gate(state, GateOp::cnot(c, q));
      qsim::apply_gate(state, GateOp::cnot(c, q));
      CHECK(max_abs_diff(before, state) < 1e-12);
    }
  }
}

TEST_CASE("norm is conserved over random gate sequences") {
  rng::Prng prng(0xfeed);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(prng.next_below(6));
    StateVector state = qsim::zero_state(n);
    const auto ops = testsupport::random_circuit(prng, n, 40);
    qsim::apply_circuit(state, ops);
    CHECK(std::abs(qsim::l2_norm(state) - 1.0) < 1e-10);
    const double z = qsim::expectation_z(state, 0);
    CHECK(z >= -1.0 - 1e-12);
    CHECK(z <= 1.0 + 1e-12);
  }
}

TEST_CASE("stride application matches the full-unitary oracle") {
  rng::Prng prng(0xabcd);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(prng.next_below(5));
    const auto ops = testsupport::random_circuit(prng, n, 12);
    StateVector fast = qsim::zero_state(n);
    qsim::apply_circuit(fast, ops);
    const StateVector slow = testsupport::oracle_apply(qsim::zero_state(n), ops);
    CHECK(max_abs_diff(fast, slow) < 1e-12);
  }
}

TEST_CASE("norm_watch tracks the worst deviation") {
  qsim::norm_watch::reset();
  CHECK(qsim::norm_watch::worst() == 0.0);
  qsim::norm_watch::record(1e-13);
  qsim::norm_watch::record(5e-14);
  CHECK(qsim::norm_watch::worst() == doctest::Approx(1e-13));
  qsim::norm_watch::reset();
  CHECK(qsim::norm_watch::worst() == 0.0);
}
