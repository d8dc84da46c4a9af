#include "stancelab/nn.hpp"

#include <Eigen/QR>

#include <cmath>

namespace stancelab::nn {

void adam_update(const ParamList& params, const AdamConfig& cfg, std::size_t step, double grad_scale) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const double lr = cfg.learning_rate * std::sqrt(c2) / c1;
  for (Param* p : params) {
    auto g = p->grad.array() * grad_scale;
    p->m.array() = cfg.beta1 * p->m.array() + (1.0 - cfg.beta1) * g;
    p->v.array() = cfg.beta2 * p->v.array() + (1.0 - cfg.beta2) * g.square();
    p->value.array() -= lr * p->m.array() / (p->v.array().sqrt() + cfg.epsilon);
  }
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * limit;
  return m;
}

Matrix normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * standard_normal(rng);
  return m;
}

Matrix orthogonal_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const bool tall = rows >= cols;
  const Eigen::Index r = tall ? rows : cols;
  const Eigen::Index c = tall ? cols : rows;
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = standard_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  // Sign fix so the distribution is uniform over orthogonal matrices.
  const Eigen::MatrixXd rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < c; ++j) {
    if (rmat(j, j) < 0) q.col(j) *= -1.0;
  }
  return tall ? Matrix(q) : Matrix(q.transpose());
}

}  // namespace stancelab::nn
