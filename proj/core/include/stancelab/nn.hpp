#pragma once

#include "stancelab/feature_block.hpp"
#include "stancelab/random.hpp"

#include <string>
#include <vector>

namespace stancelab::nn {

// A trainable tensor (stored as a matrix; vectors are n x 1) with its
// gradient accumulator and Adam moments.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Param() = default;
  Param(std::string n, Matrix init)
      : name(std::move(n)), value(std::move(init)),
        grad(Matrix::Zero(value.rows(), value.cols())),
        m(Matrix::Zero(value.rows(), value.cols())),
        v(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

using ParamList = std::vector<Param*>;

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

// Adam with bias correction; `step` is 1-based.
void adam_update(const ParamList& params, const AdamConfig& cfg, std::size_t step, double grad_scale = 1.0);

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Matrix normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
// rows x cols with orthonormal columns (rows >= cols) or rows (rows < cols).
Matrix orthogonal_init(Eigen::Index rows, Eigen::Index cols, Rng& rng);

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace stancelab::nn
