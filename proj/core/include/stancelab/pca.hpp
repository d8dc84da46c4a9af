#pragma once

#include "stancelab/feature_block.hpp"

namespace stancelab {

// Principal components of the training rows. components is k_eff x d_in with
// orthonormal rows ordered by decreasing explained variance.
struct PcaModel {
  Matrix components;
  Vector mean;
  Vector explained_variance;
  std::size_t k = 0;  // k_eff

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return k; }
};

// k_eff = min(k, rank of the centred matrix). Throws on an empty block or k == 0.
PcaModel pca_fit(const FeatureBlock& block, std::size_t k);
PcaModel pca_fit(const Matrix& rows, std::size_t k);

FeatureBlock pca_transform(const PcaModel& model, const FeatureBlock& block);
Matrix pca_transform(const PcaModel& model, const Matrix& rows);
Vector pca_transform_row(const PcaModel& model, const Eigen::Ref<const Vector>& row);

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected);

}  // namespace stancelab
