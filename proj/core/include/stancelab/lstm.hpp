#pragma once

#include "stancelab/nn.hpp"

namespace stancelab::nn {

// Single-direction LSTM, gate order (input, forget, cell, output).
class Lstm {
public:
  struct Tape {
    Matrix gates;   // n x 4U, post-activation
    Matrix cells;   // n x U
    Matrix tanh_c;  // n x U
    Matrix hidden;  // n x U
  };

  Lstm() = default;
  Lstm(std::string name, Eigen::Index input_dim, Eigen::Index units, Rng& rng);

  Eigen::Index units() const { return units_; }
  Eigen::Index input_dim() const { return input_dim_; }

  // x: n x input_dim, processed in row order (reverse=true walks from the last row).
  // Returns n x U hidden states aligned with x's rows.
  Matrix forward(const Matrix& x, bool reverse, Tape& tape) const;
  // Accumulates parameter gradients; returns dL/dx when want_dx.
  Matrix backward(const Matrix& x, bool reverse, const Tape& tape, const Matrix& d_hidden, bool want_dx);

  ParamList params() { return {&kernel_, &recurrent_, &bias_}; }

private:
  Eigen::Index input_dim_ = 0;
  Eigen::Index units_ = 0;
  Param kernel_;     // 4U x input_dim
  Param recurrent_;  // 4U x U
  Param bias_;       // 4U x 1
};

// Forward and backward LSTMs; output rows are [h_fwd, h_bwd].
class BiLstm {
public:
  struct Tape {
    Lstm::Tape fwd;
    Lstm::Tape bwd;
  };

  BiLstm() = default;
  BiLstm(const std::string& name, Eigen::Index input_dim, Eigen::Index units, Rng& rng);

  Eigen::Index output_dim() const { return 2 * fwd_.units(); }
  Matrix forward(const Matrix& x, Tape& tape) const;
  Matrix backward(const Matrix& x, const Tape& tape, const Matrix& d_out, bool want_dx);
  ParamList params();

private:
  Lstm fwd_;
  Lstm bwd_;
};

}  // namespace stancelab::nn
