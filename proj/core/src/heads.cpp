#include "stancelab/heads.hpp"

#include "stancelab/error.hpp"

#include <algorithm>
#include <cmath>

namespace stancelab {

std::string_view to_string(HeadKind k) {
  switch (k) {
    case HeadKind::Cnn1d: return "Conv1D";
    case HeadKind::Cnn2dMulti: return "Conv2D";
    case HeadKind::BiLstm: return "BiLSTM";
    case HeadKind::AttBiLstm: return "AttLSTM";
  }
  return "Conv2D";
}

std::optional<HeadKind> parse_head_kind(std::string_view s) {
  for (auto k : {HeadKind::Cnn1d, HeadKind::Cnn2dMulti, HeadKind::BiLstm, HeadKind::AttBiLstm}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::size_t head_output_dim(const HeadConfig& cfg, std::size_t seq_len, std::size_t input_dim) {
  if (input_dim == 0) throw Error("head input dimension must be >= 1");
  if (seq_len == 0) throw Error("head sequence length must be >= 1");
  switch (cfg.kind) {
    case HeadKind::Cnn1d: {
      if (cfg.kernel_1d < 1 || cfg.pool_1d < 1 || cfg.filters_1d < 1) {
        throw Error("Conv1D: kernel, pool and filter counts must be >= 1");
      }
      const std::size_t need = cfg.kernel_1d + cfg.pool_1d - 1;
      if (seq_len < need) {
        throw Error("Conv1D: sequence length " + std::to_string(seq_len) + " is below kernel + pool - 1 = " +
                    std::to_string(need) + "; pad inputs to a longer max_len");
      }
      return cfg.filters_1d * ((seq_len - cfg.kernel_1d + 1) / cfg.pool_1d);
    }
    case HeadKind::Cnn2dMulti: {
      if (cfg.filter_sizes_2d.empty()) throw Error("Conv2D: filter size set is empty");
      if (cfg.filters_per_head < 1) throw Error("Conv2D: filters_per_head must be >= 1");
      const auto biggest = *std::max_element(cfg.filter_sizes_2d.begin(), cfg.filter_sizes_2d.end());
      const auto smallest = *std::min_element(cfg.filter_sizes_2d.begin(), cfg.filter_sizes_2d.end());
      if (smallest < 1) throw Error("Conv2D: filter sizes must be >= 1");
      if (seq_len < biggest) {
        throw Error("Conv2D: sequence length " + std::to_string(seq_len) + " is below the largest filter size " +
                    std::to_string(biggest) + "; pad inputs to a longer max_len");
      }
      return cfg.filters_per_head * cfg.filter_sizes_2d.size();
    }
    case HeadKind::BiLstm:
      if (cfg.lstm_units < 1) throw Error("BiLSTM: units must be >= 1");
      return 4 * cfg.lstm_units;
    case HeadKind::AttBiLstm:
      if (cfg.lstm_units < 1 || cfg.lstm_units_2 < 1 || cfg.attention_units < 1) {
        throw Error("AttLSTM: unit counts must be >= 1");
      }
      return 2 * cfg.lstm_units_2;
  }
  return 0;
}

Head::Head(const HeadConfig& cfg, std::size_t seq_len, std::size_t input_dim)
    : cfg_(cfg), seq_len_(seq_len), input_dim_(input_dim), output_dim_(head_output_dim(cfg, seq_len, input_dim)) {}

void Head::check_input(const SequenceMatrix& x) const {
  if (x.length() != seq_len_ || x.dim() != input_dim_) {
    throw Error(std::string(to_string(cfg_.kind)) + ": expected " + std::to_string(seq_len_) + " x " +
                std::to_string(input_dim_) + " input, got " + std::to_string(x.length()) + " x " +
                std::to_string(x.dim()));
  }
  if (x.mask.size() != x.length()) throw Error("sequence mask length does not match rows");
}

namespace {

using ConstStrided = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

// Sliding windows of `width` consecutive rows, each flattened; no copy.
ConstStrided windows(const Matrix& x, std::size_t width) {
  const Eigen::Index d = x.cols();
  const Eigen::Index positions = x.rows() - static_cast<Eigen::Index>(width) + 1;
  return ConstStrided(x.data(), positions, static_cast<Eigen::Index>(width) * d, Eigen::OuterStride<>(d));
}

void scatter_windows(Matrix& dx, const Matrix& d_windows, std::size_t width) {
  const Eigen::Index span = static_cast<Eigen::Index>(width) * dx.cols();
  for (Eigen::Index t = 0; t < d_windows.rows(); ++t) {
    Eigen::Map<Eigen::RowVectorXd>(dx.data() + t * dx.cols(), span) += d_windows.row(t);
  }
}

// Valid convolution over time with ReLU: window width w, F filters.
struct ConvUnit {
  std::size_t width = 0;
  nn::Param kernel;  // F x (w*d)
  nn::Param bias;    // F x 1

  ConvUnit() = default;
  ConvUnit(const std::string& name, std::size_t w, std::size_t d, std::size_t filters, double stddev, Rng& rng)
      : width(w),
        kernel(name + ".kernel", nn::normal_init(static_cast<Eigen::Index>(filters),
                                                 static_cast<Eigen::Index>(w * d), stddev, rng)),
        bias(name + ".bias", Matrix::Zero(static_cast<Eigen::Index>(filters), 1)) {}

  // Pre-activation positions x F.
  Matrix pre(const Matrix& x) const {
    Matrix z = windows(x, width) * kernel.value.transpose();
    z.rowwise() += bias.value.col(0).transpose();
    return z;
  }

  void backward(const Matrix& x, const Matrix& d_pre, Matrix* dx) {
    kernel.grad.noalias() += d_pre.transpose() * windows(x, width);
    bias.grad.col(0) += d_pre.colwise().sum().transpose();
    if (dx) scatter_windows(*dx, d_pre * kernel.value, width);
  }
};

Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& z, const Matrix& d) { return (z.array() > 0.0).select(d, 0.0); }

// ---------------------------------------------------------------------- Conv1D

class Cnn1dHead final : public Head {
public:
  struct Tape : HeadTape {
    Matrix pre;
    std::vector<Eigen::Index> argmax;  // pooled index * F + filter -> position
  };

  Cnn1dHead(const HeadConfig& cfg, std::size_t L, std::size_t d) : Head(cfg, L, d) {
    Rng rng = derive_rng(cfg.seed, "cnn1d:" + std::to_string(d));
    conv_ = ConvUnit("cnn1d", cfg.kernel_1d, d, cfg.filters_1d, cfg.conv_init_std, rng);
  }

  std::unique_ptr<HeadTape> make_tape() const override { return std::make_unique<Tape>(); }

  HeadOutput forward(const SequenceMatrix& x, HeadTape* tape) const override {
    check_input(x);
    const Matrix pre = conv_.pre(x.rows);
    const Matrix act = relu(pre);
    const auto filters = static_cast<Eigen::Index>(cfg_.filters_1d);
    const auto pool = static_cast<Eigen::Index>(cfg_.pool_1d);
    const Eigen::Index pooled = act.rows() / pool;
    HeadOutput out;
    out.vector.resize(pooled * filters);
    std::vector<Eigen::Index> arg(static_cast<std::size_t>(pooled * filters));
    for (Eigen::Index i = 0; i < pooled; ++i) {
      for (Eigen::Index f = 0; f < filters; ++f) {
        Eigen::Index best = i * pool;
        for (Eigen::Index k = 1; k < pool; ++k) {
          if (act(i * pool + k, f) > act(best, f)) best = i * pool + k;
        }
        out.vector[i * filters + f] = act(best, f);
        arg[static_cast<std::size_t>(i * filters + f)] = best;
      }
    }
    if (auto* t = dynamic_cast<Tape*>(tape)) {
      t->pre = pre;
      t->argmax = std::move(arg);
    }
    return out;
  }

  Matrix backward(const SequenceMatrix& x, const HeadTape& tape, const Vector& d_out, bool want_dx) override {
    const auto& t = dynamic_cast<const Tape&>(tape);
    const auto filters = static_cast<Eigen::Index>(cfg_.filters_1d);
    Matrix d_act = Matrix::Zero(t.pre.rows(), t.pre.cols());
    for (Eigen::Index j = 0; j < d_out.size(); ++j) {
      d_act(t.argmax[static_cast<std::size_t>(j)], j % filters) += d_out[j];
    }
    const Matrix d_pre = relu_mask(t.pre, d_act);
    Matrix dx;
    if (want_dx) dx = Matrix::Zero(x.rows.rows(), x.rows.cols());
    conv_.backward(x.rows, d_pre, want_dx ? &dx : nullptr);
    return dx;
  }

  nn::ParamList params() override { return {&conv_.kernel, &conv_.bias}; }

private:
  ConvUnit conv_;
};

// ---------------------------------------------------------------------- Conv2D

class Cnn2dHead final : public Head {
public:
  struct Tape : HeadTape {
    std::vector<Matrix> pre;
    std::vector<std::vector<Eigen::Index>> argmax;  // per head, per filter
  };

  Cnn2dHead(const HeadConfig& cfg, std::size_t L, std::size_t d) : Head(cfg, L, d) {
    Rng rng = derive_rng(cfg.seed, "cnn2d:" + std::to_string(d));
    for (auto f : cfg.filter_sizes_2d) {
      convs_.emplace_back("cnn2d.f" + std::to_string(f), f, d, cfg.filters_per_head, cfg.conv_init_std, rng);
    }
  }

  std::unique_ptr<HeadTape> make_tape() const override { return std::make_unique<Tape>(); }

  HeadOutput forward(const SequenceMatrix& x, HeadTape* tape) const override {
    check_input(x);
    auto* t = dynamic_cast<Tape*>(tape);
    if (t) {
      t->pre.clear();
      t->argmax.clear();
    }
    const auto filters = static_cast<Eigen::Index>(cfg_.filters_per_head);
    HeadOutput out;
    out.vector.resize(static_cast<Eigen::Index>(convs_.size()) * filters);
    for (std::size_t h = 0; h < convs_.size(); ++h) {
      Matrix pre = convs_[h].pre(x.rows);
      std::vector<Eigen::Index> arg(static_cast<std::size_t>(filters));
      for (Eigen::Index f = 0; f < filters; ++f) {
        Eigen::Index best = 0;
        pre.col(f).maxCoeff(&best);
        arg[static_cast<std::size_t>(f)] = best;
        out.vector[static_cast<Eigen::Index>(h) * filters + f] = std::max(0.0, pre(best, f));
      }
      if (t) {
        t->pre.push_back(std::move(pre));
        t->argmax.push_back(std::move(arg));
      }
    }
    return out;
  }

  Matrix backward(const SequenceMatrix& x, const HeadTape& tape, const Vector& d_out, bool want_dx) override {
    const auto& t = dynamic_cast<const Tape&>(tape);
    const auto filters = static_cast<Eigen::Index>(cfg_.filters_per_head);
    Matrix dx;
    if (want_dx) dx = Matrix::Zero(x.rows.rows(), x.rows.cols());
    for (std::size_t h = 0; h < convs_.size(); ++h) {
      const Matrix& pre = t.pre[h];
      Matrix d_pre = Matrix::Zero(pre.rows(), pre.cols());
      for (Eigen::Index f = 0; f < filters; ++f) {
        const auto pos = t.argmax[h][static_cast<std::size_t>(f)];
        if (pre(pos, f) > 0.0) d_pre(pos, f) = d_out[static_cast<Eigen::Index>(h) * filters + f];
      }
      convs_[h].backward(x.rows, d_pre, want_dx ? &dx : nullptr);
    }
    return dx;
  }

  nn::ParamList params() override {
    nn::ParamList out;
    for (auto& c : convs_) {
      out.push_back(&c.kernel);
      out.push_back(&c.bias);
    }
    return out;
  }

private:
  std::vector<ConvUnit> convs_;
};

// -------------------------------------------------------------- recurrent heads

std::vector<Eigen::Index> active_steps(const SequenceMatrix& x, HeadKind kind) {
  std::vector<Eigen::Index> idx;
  for (std::size_t t = 0; t < x.mask.size(); ++t) {
    if (x.mask[t]) idx.push_back(static_cast<Eigen::Index>(t));
  }
  if (idx.empty()) throw Error(std::string(to_string(kind)) + ": input has no unmasked step");
  return idx;
}

Matrix gather_rows(const Matrix& x, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

Matrix scatter_rows(const Matrix& d_active, const std::vector<Eigen::Index>& idx, Eigen::Index rows) {
  Matrix out = Matrix::Zero(rows, d_active.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(idx[i]) = d_active.row(static_cast<Eigen::Index>(i));
  return out;
}

class BiLstmHead final : public Head {
public:
  struct Tape : HeadTape {
    std::vector<Eigen::Index> active;
    Matrix x_active;
    nn::BiLstm::Tape lstm;
    std::vector<Eigen::Index> argmax;
    Eigen::Index steps = 0;
  };

  BiLstmHead(const HeadConfig& cfg, std::size_t L, std::size_t d) : Head(cfg, L, d) {
    Rng rng = derive_rng(cfg.seed, "bilstm:" + std::to_string(d));
    lstm_ = nn::BiLstm("bilstm", static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(cfg.lstm_units), rng);
  }

  std::unique_ptr<HeadTape> make_tape() const override { return std::make_unique<Tape>(); }

  HeadOutput forward(const SequenceMatrix& x, HeadTape* tape) const override {
    check_input(x);
    Tape local;
    Tape& t = tape ? dynamic_cast<Tape&>(*tape) : local;
    t.active = active_steps(x, cfg_.kind);
    t.x_active = gather_rows(x.rows, t.active);
    const Matrix h = lstm_.forward(t.x_active, t.lstm);
    t.steps = h.rows();
    const Eigen::Index width = h.cols();
    HeadOutput out;
    out.vector.resize(2 * width);
    t.argmax.assign(static_cast<std::size_t>(width), 0);
    for (Eigen::Index j = 0; j < width; ++j) {
      Eigen::Index best = 0;
      out.vector[j] = h.col(j).maxCoeff(&best);
      t.argmax[static_cast<std::size_t>(j)] = best;
    }
    out.vector.tail(width) = h.colwise().mean().transpose();
    return out;
  }

  Matrix backward(const SequenceMatrix& x, const HeadTape& tape, const Vector& d_out, bool want_dx) override {
    const auto& t = dynamic_cast<const Tape&>(tape);
    const Eigen::Index width = lstm_.output_dim();
    Matrix dh = Matrix::Constant(t.steps, width, 0.0);
    dh.rowwise() += (d_out.tail(width) / static_cast<double>(t.steps)).transpose();
    for (Eigen::Index j = 0; j < width; ++j) dh(t.argmax[static_cast<std::size_t>(j)], j) += d_out[j];
    Matrix dxa = lstm_.backward(t.x_active, t.lstm, dh, want_dx);
    if (!want_dx) return {};
    return scatter_rows(dxa, t.active, x.rows.rows());
  }

  nn::ParamList params() override { return lstm_.params(); }

private:
  nn::BiLstm lstm_;
};

class AttBiLstmHead final : public Head {
public:
  struct Tape : HeadTape {
    std::vector<Eigen::Index> active;
    Matrix x_active;
    nn::BiLstm::Tape lstm1, lstm2;
    Matrix h1, h2, u;
    Vector alpha;
  };

  AttBiLstmHead(const HeadConfig& cfg, std::size_t L, std::size_t d) : Head(cfg, L, d) {
    Rng rng = derive_rng(cfg.seed, "attlstm:" + std::to_string(d));
    const auto u1 = static_cast<Eigen::Index>(cfg.lstm_units);
    const auto u2 = static_cast<Eigen::Index>(cfg.lstm_units_2);
    const auto a = static_cast<Eigen::Index>(cfg.attention_units);
    lstm1_ = nn::BiLstm("attlstm.l1", static_cast<Eigen::Index>(d), u1, rng);
    lstm2_ = nn::BiLstm("attlstm.l2", 2 * u1, u2, rng);
    att_w_ = nn::Param("attlstm.att.w", nn::glorot_uniform(a, 2 * u2, rng));
    att_b_ = nn::Param("attlstm.att.b", Matrix::Zero(a, 1));
    att_v_ = nn::Param("attlstm.att.v", nn::glorot_uniform(a, 1, rng));
  }

  std::unique_ptr<HeadTape> make_tape() const override { return std::make_unique<Tape>(); }

  HeadOutput forward(const SequenceMatrix& x, HeadTape* tape) const override {
    check_input(x);
    Tape local;
    Tape& t = tape ? dynamic_cast<Tape&>(*tape) : local;
    t.active = active_steps(x, cfg_.kind);
    t.x_active = gather_rows(x.rows, t.active);
    t.h1 = lstm1_.forward(t.x_active, t.lstm1);
    t.h2 = lstm2_.forward(t.h1, t.lstm2);
    Matrix pre = t.h2 * att_w_.value.transpose();
    pre.rowwise() += att_b_.value.col(0).transpose();
    t.u = pre.array().tanh();
    const Vector scores = t.u * att_v_.value.col(0);
    // Masked softmax: padding steps were never gathered, so they carry zero weight.
    const double top = scores.maxCoeff();
    t.alpha = (scores.array() - top).exp();
    t.alpha /= t.alpha.sum();
    HeadOutput out;
    out.vector = t.h2.transpose() * t.alpha;
    return out;
  }

  Matrix backward(const SequenceMatrix& x, const HeadTape& tape, const Vector& d_out, bool want_dx) override {
    const auto& t = dynamic_cast<const Tape&>(tape);
    const Vector d_alpha = t.h2 * d_out;
    Matrix dh2 = t.alpha * d_out.transpose();
    const double mean = t.alpha.dot(d_alpha);
    const Vector d_scores = t.alpha.array() * (d_alpha.array() - mean);
    att_v_.grad.col(0) += t.u.transpose() * d_scores;
    const Matrix d_pre = ((d_scores * att_v_.value.col(0).transpose()).array() * (1.0 - t.u.array().square())).matrix();
    att_w_.grad.noalias() += d_pre.transpose() * t.h2;
    att_b_.grad.col(0) += d_pre.colwise().sum().transpose();
    dh2.noalias() += d_pre * att_w_.value;
    const Matrix dh1 = lstm2_.backward(t.h1, t.lstm2, dh2, true);
    Matrix dxa = lstm1_.backward(t.x_active, t.lstm1, dh1, want_dx);
    if (!want_dx) return {};
    return scatter_rows(dxa, t.active, x.rows.rows());
  }

  nn::ParamList params() override {
    nn::ParamList out = lstm1_.params();
    for (auto* p : lstm2_.params()) out.push_back(p);
    out.push_back(&att_w_);
    out.push_back(&att_b_);
    out.push_back(&att_v_);
    return out;
  }

private:
  nn::BiLstm lstm1_, lstm2_;
  nn::Param att_w_, att_b_, att_v_;
};

HeadOutput run_once(const SequenceMatrix& x, HeadConfig cfg, HeadKind kind) {
  cfg.kind = kind;
  return make_head(cfg, x.length(), x.dim())->forward(x, nullptr);
}

}  // namespace

std::unique_ptr<Head> make_head(const HeadConfig& cfg, std::size_t seq_len, std::size_t input_dim) {
  switch (cfg.kind) {
    case HeadKind::Cnn1d: return std::make_unique<Cnn1dHead>(cfg, seq_len, input_dim);
    case HeadKind::Cnn2dMulti: return std::make_unique<Cnn2dHead>(cfg, seq_len, input_dim);
    case HeadKind::BiLstm: return std::make_unique<BiLstmHead>(cfg, seq_len, input_dim);
    case HeadKind::AttBiLstm: return std::make_unique<AttBiLstmHead>(cfg, seq_len, input_dim);
  }
  throw Error("unknown head kind");
}

HeadOutput cnn1d_extract(const SequenceMatrix& x, const HeadConfig& cfg) { return run_once(x, cfg, HeadKind::Cnn1d); }
HeadOutput cnn2d_multihead_extract(const SequenceMatrix& x, const HeadConfig& cfg) {
  return run_once(x, cfg, HeadKind::Cnn2dMulti);
}
HeadOutput bilstm_extract(const SequenceMatrix& x, const HeadConfig& cfg) { return run_once(x, cfg, HeadKind::BiLstm); }
HeadOutput att_bilstm_extract(const SequenceMatrix& x, const HeadConfig& cfg) {
  return run_once(x, cfg, HeadKind::AttBiLstm);
}

std::vector<double> attention_weights(const HeadTape& tape) {
  if (const auto* t = dynamic_cast<const AttBiLstmHead::Tape*>(&tape)) {
    return {t->alpha.data(), t->alpha.data() + t->alpha.size()};
  }
  return {};
}

}  // namespace stancelab
