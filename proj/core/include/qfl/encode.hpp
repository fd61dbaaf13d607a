#pragma once

#include <span>
#include <vector>

#include "qfl/matrix.hpp"
#include "qfl/qsim.hpp"

namespace qfl::encode {

enum class EmbeddingKind { Angle, Amplitude };

// Angle embedding consumes one feature per qubit; amplitude embedding fits
// up to 2^n features. Throws ShapeError when violated.
void validate_embedding(EmbeddingKind kind, int num_features, int num_qubits);

// State = tensor product of RX(features[i]) |0> per qubit. Features are
// expected pre-scaled (see FeatureScaler).
qsim::StateVector angle_embed(std::span<const double> features, int num_qubits);

// Features zero-padded to 2^n then L2-normalized into the amplitudes.
// Throws ShapeError (too many features) or NormalizationError (all zero).
qsim::StateVector amplitude_embed(std::span<const double> features, int num_qubits);

// Affine per-column map from the training range [train_min, train_max] to
// [low, high], clipped; constant columns map to the midpoint.
Matrix scale_features(const Matrix& raw, double low, double high,
                      std::span<const double> train_min,
                      std::span<const double> train_max);

// Convenience wrapper that learns per-column min/max on a training matrix
// and applies scale_features with those statistics (test data reuses them).
class FeatureScaler {
 public:
  FeatureScaler(double low, double high) : low_(low), high_(high) {}

  void fit(const Matrix& train);
  Matrix transform(const Matrix& data) const;
  std::vector<double> transform_row(std::span<const double> row) const;

  std::span<const double> train_min() const { return train_min_; }
  std::span<const double> train_max() const { return train_max_; }

 private:
  double low_;
  double high_;
  std::vector<double> train_min_;
  std::vector<double> train_max_;
};

}  // namespace qfl::encode
