#include "qfl/encode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfl/errors.hpp"

namespace qfl::encode {

void validate_embedding(EmbeddingKind kind, int num_features, int num_qubits) {
  if (num_qubits < 1) {
    throw ShapeError("embedding requires at least one qubit");
  }
  if (kind == EmbeddingKind::Angle) {
    if (num_features != num_qubits) {
      throw ShapeError("angle embedding needs one feature per qubit: " +
                       std::to_string(num_features) + " features vs " +
                       std::to_string(num_qubits) + " qubits");
    }
  } else {
    const std::size_t capacity = std::size_t{1} << num_qubits;
    if (num_features < 1 || static_cast<std::size_t>(num_features) > capacity) {
      throw ShapeError("amplitude embedding fits at most 2^" +
                       std::to_string(num_qubits) + " = " +
                       std::to_string(capacity) + " features, got " +
                       std::to_string(num_features));
    }
  }
}

qsim::StateVector angle_embed(std::span<const double> features, int num_qubits) {
  validate_embedding(EmbeddingKind::Angle, static_cast<int>(features.size()),
                     num_qubits);
  qsim::StateVector state = qsim::zero_state(num_qubits);
  for (int q = 0; q < num_qubits; ++q) {
    qsim::apply_gate(state, qsim::GateOp::rx(q, features[q]));
  }
  return state;
}

qsim::StateVector amplitude_embed(std::span<const double> features, int num_qubits) {
  validate_embedding(EmbeddingKind::Amplitude, static_cast<int>(features.size()),
                     num_qubits);
  qsim::StateVector state = qsim::zero_state(num_qubits);
  double sum_sq = 0.0;
  for (double f : features) {
    sum_sq += f * f;
  }
  if (sum_sq == 0.0) {
    throw NormalizationError("amplitude embedding of an all-zero feature vector");
  }
  const double inv_norm = 1.0 / std::sqrt(sum_sq);
  state.amplitudes[0] = qsim::Amplitude{};  // drop the |0...0> seed
  for (std::size_t i = 0; i < features.size(); ++i) {
    state.amplitudes[i] = qsim::Amplitude{features[i] * inv_norm, 0.0};
  }
  return state;
}

Matrix scale_features(const Matrix& raw, double low, double high,
                      std::span<const double> train_min,
                      std::span<const double> train_max) {
  if (train_min.size() != raw.cols || train_max.size() != raw.cols) {
    throw ShapeError("scale_features: column statistics do not match matrix width");
  }
  const double mid = 0.5 * (low + high);
  Matrix out(raw.rows, raw.cols);
  for (std::size_t c = 0; c < raw.cols; ++c) {
    const double span = train_max[c] - train_min[c];
    for (std::size_t r = 0; r < raw.rows; ++r) {
      double v;
      if (span <= 0.0) {
        v = mid;  // degenerate column
      } else {
        v = low + (raw.at(r, c) - train_min[c]) * (high - low) / span;
        v = std::clamp(v, low, high);
      }
      out.at(r, c) = v;
    }
  }
  return out;
}

void FeatureScaler::fit(const Matrix& train) {
  if (train.rows == 0 || train.cols == 0) {
    throw UsageError("FeatureScaler::fit: empty training matrix");
  }
  train_min_.assign(train.cols, 0.0);
  train_max_.assign(train.cols, 0.0);
  for (std::size_t c = 0; c < train.cols; ++c) {
    double lo = train.at(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < train.rows; ++r) {
      lo = std::min(lo, train.at(r, c));
      hi = std::max(hi, train.at(r, c));
    }
    train_min_[c] = lo;
    train_max_[c] = hi;
  }
}

Matrix FeatureScaler::transform(const Matrix& data) const {
  if (train_min_.empty()) {
    throw UsageError("FeatureScaler::transform before fit");
  }
  return scale_features(data, low_, high_, train_min_, train_max_);
}

std::vector<double> FeatureScaler::transform_row(std::span<const double> row) const {
  Matrix m(1, row.size());
  std::copy(row.begin(), row.end(), m.values.begin());
  Matrix scaled = transform(m);
  return scaled.values;
}

}  // namespace qfl::encode
