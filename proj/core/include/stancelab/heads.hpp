#pragma once

#include "stancelab/embedfeat.hpp"
#include "stancelab/lstm.hpp"
#include "stancelab/nn.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace stancelab {

enum class HeadKind { Cnn1d, Cnn2dMulti, BiLstm, AttBiLstm };

std::string_view to_string(HeadKind k);             // settings-grammar name: Conv1D, Conv2D, BiLSTM, AttLSTM
std::optional<HeadKind> parse_head_kind(std::string_view s);

struct HeadConfig {
  HeadKind kind = HeadKind::Cnn2dMulti;
  std::size_t filters_1d = 32;
  std::size_t kernel_1d = 5;
  std::size_t pool_1d = 2;
  std::vector<std::size_t> filter_sizes_2d{1, 2, 3, 5};
  std::size_t filters_per_head = 32;
  std::size_t lstm_units = 64;
  std::size_t lstm_units_2 = 128;
  std::size_t attention_units = 128;
  double conv_init_std = 0.05;
  std::uint64_t seed = 0;
};

// Output width for an L x d input; throws when the shape violates the head's
// precondition (e.g. Conv1D needs L >= kernel + pool - 1).
std::size_t head_output_dim(const HeadConfig& cfg, std::size_t seq_len, std::size_t input_dim);

struct HeadOutput {
  Vector vector;
  std::size_t dim() const { return static_cast<std::size_t>(vector.size()); }
};

// Per-forward activations needed by backward().
struct HeadTape {
  virtual ~HeadTape() = default;
};

// A parameterised sequence feature extractor for fixed (L, d). forward() is
// const and keeps activations in the caller's tape, so frozen heads can run
// concurrently on distinct inputs.
class Head {
public:
  virtual ~Head() = default;

  HeadKind kind() const { return cfg_.kind; }
  const HeadConfig& config() const { return cfg_; }
  std::size_t seq_len() const { return seq_len_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }

  virtual std::unique_ptr<HeadTape> make_tape() const = 0;
  // `tape` may be null when no backward pass follows.
  virtual HeadOutput forward(const SequenceMatrix& x, HeadTape* tape) const = 0;
  // Accumulates parameter gradients for dL/d(output) = d_out; returns dL/dx
  // (L x d) when want_dx, otherwise an empty matrix.
  virtual Matrix backward(const SequenceMatrix& x, const HeadTape& tape, const Vector& d_out, bool want_dx) = 0;
  virtual nn::ParamList params() = 0;

protected:
  Head(const HeadConfig& cfg, std::size_t seq_len, std::size_t input_dim);
  void check_input(const SequenceMatrix& x) const;

  HeadConfig cfg_;
  std::size_t seq_len_;
  std::size_t input_dim_;
  std::size_t output_dim_;
};

// Parameters are drawn from cfg.seed; identical (seed, shapes) give identical heads.
std::unique_ptr<Head> make_head(const HeadConfig& cfg, std::size_t seq_len, std::size_t input_dim);

// One-shot extraction with freshly seeded parameters.
HeadOutput cnn1d_extract(const SequenceMatrix& x, const HeadConfig& cfg);
HeadOutput cnn2d_multihead_extract(const SequenceMatrix& x, const HeadConfig& cfg);
HeadOutput bilstm_extract(const SequenceMatrix& x, const HeadConfig& cfg);
HeadOutput att_bilstm_extract(const SequenceMatrix& x, const HeadConfig& cfg);

// Attention weights over the unmasked steps from the last att_bilstm forward
// recorded in `tape` (empty for other head kinds).
std::vector<double> attention_weights(const HeadTape& tape);

}  // namespace stancelab
