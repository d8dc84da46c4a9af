#include "stancelab/pca.hpp"

#include "stancelab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace stancelab {

namespace {

// Relative eigenvalue cut-off used to decide the rank of the centred matrix.
constexpr double kRankTolerance = 1e-10;

void orthonormalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      m.row(i) -= m.row(i).dot(m.row(j)) * m.row(j);
    }
    m.row(i).normalize();
  }
}

void fix_signs(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index arg = 0;
    m.row(i).cwiseAbs().maxCoeff(&arg);
    if (m(i, arg) < 0) m.row(i) *= -1.0;
  }
}

}  // namespace

PcaModel pca_fit(const Matrix& rows, std::size_t k) {
  if (rows.rows() == 0 || rows.cols() == 0) throw Error("pca_fit: empty block");
  if (k == 0) throw Error("pca_fit: k must be >= 1");
  if (!rows.allFinite()) throw Error("pca_fit: non-finite input");

  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  PcaModel model;
  model.mean = rows.colwise().mean().transpose();
  const Matrix centred = rows.rowwise() - model.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;

  // Eigen-decompose whichever of the d x d covariance or n x n Gram matrix is smaller.
  const bool gram = d > n;
  Eigen::MatrixXd sym = gram ? Eigen::MatrixXd(centred * centred.transpose())
                             : Eigen::MatrixXd(centred.transpose() * centred);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("pca_fit: eigen decomposition failed");
  const Eigen::VectorXd& vals = solver.eigenvalues();    // ascending
  const Eigen::MatrixXd& vecs = solver.eigenvectors();

  const double top = std::max(vals[vals.size() - 1], 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = vals.size() - 1; i >= 0; --i) {
    if (vals[i] > kRankTolerance * top && vals[i] > 0.0) ++rank;
    else break;
  }
  model.k = std::min(k, rank);
  model.components.resize(static_cast<Eigen::Index>(model.k), d);
  model.explained_variance.resize(static_cast<Eigen::Index>(model.k));
  for (std::size_t c = 0; c < model.k; ++c) {
    const Eigen::Index src = vals.size() - 1 - static_cast<Eigen::Index>(c);
    const auto row = static_cast<Eigen::Index>(c);
    if (gram) {
      model.components.row(row) = (centred.transpose() * vecs.col(src)).transpose();
    } else {
      model.components.row(row) = vecs.col(src).transpose();
    }
    model.explained_variance[row] = vals[src] / denom;
  }
  orthonormalize_rows(model.components);
  fix_signs(model.components);
  return model;
}

PcaModel pca_fit(const FeatureBlock& block, std::size_t k) {
  try {
    return pca_fit(block.matrix, k);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " (block '" + block.name + "')");
  }
}

Matrix pca_transform(const PcaModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_dim()) {
    throw Error("pca_transform: input has " + std::to_string(rows.cols()) + " columns, model expects " +
                std::to_string(model.input_dim()));
  }
  return (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
}

FeatureBlock pca_transform(const PcaModel& model, const FeatureBlock& block) {
  FeatureBlock out;
  out.name = "PCA(" + block.name + ")";
  out.matrix = pca_transform(model, block.matrix);
  out.ordering = {"pc:" + std::to_string(model.k)};
  return out;
}

Vector pca_transform_row(const PcaModel& model, const Eigen::Ref<const Vector>& row) {
  if (static_cast<std::size_t>(row.size()) != model.input_dim()) {
    throw Error("pca_transform: dimension mismatch");
  }
  return model.components * (row - model.mean);
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected) {
  if (static_cast<std::size_t>(projected.cols()) != model.k) {
    throw Error("pca_inverse_transform: dimension mismatch");
  }
  return (projected * model.components).rowwise() + model.mean.transpose();
}

}  // namespace stancelab
