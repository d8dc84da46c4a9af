#include "stancelab/lstm.hpp"

#include <cmath>

namespace stancelab::nn {

// ------------------------------------------------------------------------ Lstm

Lstm::Lstm(std::string name, Eigen::Index input_dim, Eigen::Index units, Rng& rng)
    : input_dim_(input_dim), units_(units) {
  kernel_ = Param(name + ".kernel", glorot_uniform(4 * units, input_dim, rng));
  recurrent_ = Param(name + ".recurrent", orthogonal_init(4 * units, units, rng));
  Matrix b = Matrix::Zero(4 * units, 1);
  b.block(units, 0, units, 1).setOnes();  // forget-gate bias 1
  bias_ = Param(name + ".bias", std::move(b));
}

Matrix Lstm::forward(const Matrix& x, bool reverse, Tape& tape) const {
  const Eigen::Index n = x.rows();
  const Eigen::Index u = units_;
  tape.gates.resize(n, 4 * u);
  tape.cells.resize(n, u);
  tape.tanh_c.resize(n, u);
  tape.hidden.resize(n, u);
  // Input projections for every step at once.
  Matrix pre = x * kernel_.value.transpose();
  pre.rowwise() += bias_.value.col(0).transpose();

  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(u);
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(u);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    Eigen::RowVectorXd z = pre.row(t) + h * recurrent_.value.transpose();
    for (Eigen::Index k = 0; k < u; ++k) {
      z[k] = sigmoid(z[k]);
      z[u + k] = sigmoid(z[u + k]);
      z[2 * u + k] = std::tanh(z[2 * u + k]);
      z[3 * u + k] = sigmoid(z[3 * u + k]);
    }
    c = z.segment(u, u).cwiseProduct(c) + z.segment(0, u).cwiseProduct(z.segment(2 * u, u));
    const Eigen::RowVectorXd tc = c.array().tanh();
    h = z.segment(3 * u, u).cwiseProduct(tc);
    tape.gates.row(t) = z;
    tape.cells.row(t) = c;
    tape.tanh_c.row(t) = tc;
    tape.hidden.row(t) = h;
  }
  return tape.hidden;
}

Matrix Lstm::backward(const Matrix& x, bool reverse, const Tape& tape, const Matrix& d_hidden, bool want_dx) {
  const Eigen::Index n = x.rows();
  const Eigen::Index u = units_;
  Matrix dz(n, 4 * u);
  Matrix h_prev = Matrix::Zero(n, u);  // h_prev.row(t) = hidden state fed into step t
  Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(u);
  Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(u);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    const bool first = s == 0;
    const Eigen::Index tp = reverse ? t + 1 : t - 1;  // previous step in processing order
    const auto gates = tape.gates.row(t);
    const auto i = gates.segment(0, u).array();
    const auto f = gates.segment(u, u).array();
    const auto g = gates.segment(2 * u, u).array();
    const auto o = gates.segment(3 * u, u).array();
    const auto tc = tape.tanh_c.row(t).array();
    Eigen::ArrayXXd c_prev = first ? Eigen::ArrayXXd::Zero(1, u) : Eigen::ArrayXXd(tape.cells.row(tp).array());
    if (!first) h_prev.row(t) = tape.hidden.row(tp);

    const Eigen::ArrayXXd dh = d_hidden.row(t).array() + dh_next.array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    dz.block(t, 0, 1, u) = (dc * g * i * (1.0 - i)).matrix();
    dz.block(t, u, 1, u) = (dc * c_prev * f * (1.0 - f)).matrix();
    dz.block(t, 2 * u, 1, u) = (dc * i * (1.0 - g.square())).matrix();
    dz.block(t, 3 * u, 1, u) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh_next = dz.row(t) * recurrent_.value;
  }
  kernel_.grad.noalias() += dz.transpose() * x;
  recurrent_.grad.noalias() += dz.transpose() * h_prev;
  bias_.grad.col(0) += dz.colwise().sum().transpose();
  if (!want_dx) return {};
  return dz * kernel_.value;
}

// ---------------------------------------------------------------------- BiLstm

BiLstm::BiLstm(const std::string& name, Eigen::Index input_dim, Eigen::Index units, Rng& rng)
    : fwd_(name + ".fwd", input_dim, units, rng), bwd_(name + ".bwd", input_dim, units, rng) {}

Matrix BiLstm::forward(const Matrix& x, Tape& tape) const {
  Matrix out(x.rows(), output_dim());
  out.leftCols(fwd_.units()) = fwd_.forward(x, false, tape.fwd);
  out.rightCols(bwd_.units()) = bwd_.forward(x, true, tape.bwd);
  return out;
}

Matrix BiLstm::backward(const Matrix& x, const Tape& tape, const Matrix& d_out, bool want_dx) {
  Matrix dx_f = fwd_.backward(x, false, tape.fwd, d_out.leftCols(fwd_.units()), want_dx);
  Matrix dx_b = bwd_.backward(x, true, tape.bwd, d_out.rightCols(bwd_.units()), want_dx);
  if (!want_dx) return {};
  return dx_f + dx_b;
}

ParamList BiLstm::params() {
  ParamList out = fwd_.params();
  for (Param* p : bwd_.params()) out.push_back(p);
  return out;
}

}  // namespace stancelab::nn
