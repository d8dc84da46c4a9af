#include "stancelab/fusion.hpp"

#include "stancelab/csv.hpp"
#include "stancelab/error.hpp"
#include "stancelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace stancelab {

std::string_view to_string(FusionBlock b) {
  switch (b) {
    case FusionBlock::EmbedHead: return "embed_head";
    case FusionBlock::SvHead: return "sv_head";
    case FusionBlock::FreqPca: return "freq_pca";
    case FusionBlock::GraphUser: return "graph_user";
  }
  return "freq_pca";
}

std::optional<FusionBlock> parse_fusion_block(std::string_view s) {
  for (auto b : kFusionOrder) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

std::size_t BlockSpec::output_dim() const {
  return head ? head_output_dim(*head, seq_len, input_dim) : input_dim;
}

void FusionConfig::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("fusion: dropout_rate must lie in [0, 1)");
  if (hidden_units == 0) throw Error("fusion: hidden_units must be >= 1");
  if (optimizer.batch_size == 0) throw Error("fusion: batch_size must be >= 1");
  if (optimizer.max_epochs == 0) throw Error("fusion: max_epochs must be >= 1");
  if (!(optimizer.learning_rate >= 0.0)) throw Error("fusion: learning_rate must be >= 0");
}

StanceLabel argmax_label(const std::array<double, 3>& scores) {
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return kAllLabels[best];
}

std::array<double, 3> softmax(const std::array<double, 3>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::array<double, 3> p{};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) total += p[k] = std::exp(logits[k] - top);
  for (auto& v : p) v /= total;
  return p;
}

Vector assemble(std::vector<BlockVector> blocks, const std::vector<BlockSpec>& specs) {
  if (blocks.size() != specs.size()) {
    throw Error("assemble: got " + std::to_string(blocks.size()) + " blocks for " + std::to_string(specs.size()) +
                " declared slots");
  }
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const BlockVector& a, const BlockVector& b) { return a.slot < b.slot; });
  std::size_t total = 0;
  for (const auto& b : blocks) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const BlockSpec& s) { return s.slot == b.slot; });
    if (it == specs.end()) throw Error("assemble: slot " + std::string(to_string(b.slot)) + " is not declared");
    if (static_cast<std::size_t>(b.value.size()) != it->output_dim()) {
      throw Error("assemble: slot " + std::string(to_string(b.slot)) + " has dim " +
                  std::to_string(b.value.size()) + ", declared " + std::to_string(it->output_dim()));
    }
    total += static_cast<std::size_t>(b.value.size());
  }
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (blocks[i].slot == blocks[i - 1].slot) throw Error("assemble: duplicate slot " + std::string(to_string(blocks[i].slot)));
  }
  Vector out(static_cast<Eigen::Index>(total));
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.segment(at, b.value.size()) = b.value;
    at += b.value.size();
  }
  return out;
}

FusionData FusionData::subset(const std::vector<std::size_t>& rows) const {
  FusionData out;
  for (auto r : rows) {
    if (r >= size()) throw Error("FusionData::subset: row out of range");
    out.ids.push_back(ids[r]);
    if (!labels.empty()) out.labels.push_back(labels[r]);
  }
  for (const auto& b : blocks) {
    BlockInput nb;
    nb.slot = b.slot;
    if (!b.sequences.empty()) {
      for (auto r : rows) nb.sequences.push_back(b.sequences[r]);
    } else {
      nb.vectors.resize(static_cast<Eigen::Index>(rows.size()), b.vectors.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        nb.vectors.row(static_cast<Eigen::Index>(i)) = b.vectors.row(static_cast<Eigen::Index>(rows[i]));
      }
    }
    out.blocks.push_back(std::move(nb));
  }
  return out;
}

namespace {

const BlockInput& block_for(const FusionData& data, FusionBlock slot) {
  for (const auto& b : data.blocks) {
    if (b.slot == slot) return b;
  }
  throw Error("fusion data lacks slot " + std::string(to_string(slot)));
}

std::vector<BlockSpec> sorted_specs(std::vector<BlockSpec> specs) {
  if (specs.empty()) throw Error("fusion: at least one active block is required");
  std::stable_sort(specs.begin(), specs.end(), [](const BlockSpec& a, const BlockSpec& b) { return a.slot < b.slot; });
  for (std::size_t i = 1; i < specs.size(); ++i) {
    if (specs[i].slot == specs[i - 1].slot) throw Error("fusion: duplicate slot " + std::string(to_string(specs[i].slot)));
  }
  return specs;
}

// Inverted dropout mask: kept entries scaled by 1/(1-rate).
Vector dropout_mask(Eigen::Index n, double rate, Rng& rng) {
  Vector m(n);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < n; ++i) m[i] = uniform01(rng) < rate ? 0.0 : scale;
  return m;
}

}  // namespace

StanceModel::StanceModel(std::vector<BlockSpec> specs, FusionConfig cfg)
    : specs_(sorted_specs(std::move(specs))), cfg_(cfg) {
  cfg_.validate();
  for (const auto& s : specs_) {
    if (s.input_dim == 0) throw Error("fusion: slot " + std::string(to_string(s.slot)) + " has zero input dim");
    heads_.push_back(s.head ? make_head(*s.head, s.seq_len, s.input_dim) : nullptr);
    fused_dim_ += s.output_dim();
  }
  Rng rng = derive_rng(cfg_.seed, "fusion");
  const auto h = static_cast<Eigen::Index>(cfg_.hidden_units);
  const auto d = static_cast<Eigen::Index>(fused_dim_);
  w1_ = nn::Param("dense1.kernel", nn::glorot_uniform(h, d, rng));
  b1_ = nn::Param("dense1.bias", Matrix::Zero(h, 1));
  w2_ = nn::Param("dense2.kernel", cfg_.zero_init_output ? Matrix::Zero(3, h) : nn::glorot_uniform(3, h, rng));
  b2_ = nn::Param("dense2.bias", Matrix::Zero(3, 1));
}

void StanceModel::check_data(const FusionData& data) const {
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    const auto& b = block_for(data, s.slot);
    const std::string where = "fusion slot " + std::string(to_string(s.slot));
    if (heads_[i]) {
      if (b.sequences.size() != n) throw Error(where + ": expected " + std::to_string(n) + " sequences");
      for (const auto& seq : b.sequences) {
        if (seq.length() != s.seq_len || seq.dim() != s.input_dim) {
          throw Error(where + ": sequence is " + std::to_string(seq.length()) + " x " + std::to_string(seq.dim()) +
                      ", declared " + std::to_string(s.seq_len) + " x " + std::to_string(s.input_dim));
        }
      }
    } else if (static_cast<std::size_t>(b.vectors.rows()) != n ||
               static_cast<std::size_t>(b.vectors.cols()) != s.input_dim) {
      throw Error(where + ": vectors are " + std::to_string(b.vectors.rows()) + " x " +
                  std::to_string(b.vectors.cols()) + ", expected " + std::to_string(n) + " x " +
                  std::to_string(s.input_dim));
    }
  }
}

Prediction StanceModel::classify(const Vector& fused, Rng* dropout_rng) const {
  if (static_cast<std::size_t>(fused.size()) != fused_dim_) {
    throw Error("fusion: input dim " + std::to_string(fused.size()) + " != model dim " + std::to_string(fused_dim_));
  }
  const bool drop = dropout_rng && cfg_.dropout_rate > 0.0;
  Vector x = fused;
  if (drop) x.array() *= dropout_mask(x.size(), cfg_.dropout_rate, *dropout_rng).array();
  Vector h = (w1_.value * x + b1_.value.col(0)).cwiseMax(0.0);
  if (drop) h.array() *= dropout_mask(h.size(), cfg_.dropout_rate, *dropout_rng).array();
  const Vector z = w2_.value * h + b2_.value.col(0);
  Prediction p;
  p.probs = softmax({z[0], z[1], z[2]});
  p.label = argmax_label(p.probs);
  return p;
}

Vector StanceModel::fuse(const FusionData& data, std::size_t row) const {
  Vector out(static_cast<Eigen::Index>(fused_dim_));
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& b = block_for(data, specs_[i].slot);
    if (heads_[i]) {
      const Vector v = heads_[i]->forward(b.sequences[row], nullptr).vector;
      out.segment(at, v.size()) = v;
      at += v.size();
    } else {
      out.segment(at, b.vectors.cols()) = b.vectors.row(static_cast<Eigen::Index>(row)).transpose();
      at += b.vectors.cols();
    }
  }
  return out;
}

Prediction StanceModel::predict(const FusionData& data, std::size_t row) const {
  return classify(fuse(data, row));
}

std::vector<Prediction> StanceModel::predict(const FusionData& data) const {
  check_data(data);
  std::vector<Prediction> out;
  out.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) out.push_back(predict(data, r));
  return out;
}

double StanceModel::loss(const FusionData& data, const std::vector<std::size_t>& rows, bool accumulate,
                         Rng* dropout_rng) {
  if (rows.empty()) throw Error("fusion: empty batch");
  if (data.labels.size() != data.size()) throw Error("fusion: training data must be labeled");
  const bool drop = dropout_rng && cfg_.dropout_rate > 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  std::vector<std::unique_ptr<HeadTape>> tapes(specs_.size());
  std::vector<const BlockInput*> inputs;
  for (const auto& s : specs_) inputs.push_back(&block_for(data, s.slot));

  double total = 0.0;
  Vector x(static_cast<Eigen::Index>(fused_dim_));
  for (auto row : rows) {
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      if (heads_[i]) {
        if (accumulate) tapes[i] = heads_[i]->make_tape();
        const Vector v = heads_[i]->forward(inputs[i]->sequences[row], tapes[i].get()).vector;
        x.segment(at, v.size()) = v;
        at += v.size();
      } else {
        const auto& m = inputs[i]->vectors;
        x.segment(at, m.cols()) = m.row(static_cast<Eigen::Index>(row)).transpose();
        at += m.cols();
      }
    }
    Vector mask0, mask1;
    Vector xd = x;
    if (drop) {
      mask0 = dropout_mask(x.size(), cfg_.dropout_rate, *dropout_rng);
      xd.array() *= mask0.array();
    }
    const Vector z1 = w1_.value * xd + b1_.value.col(0);
    Vector hd = z1.cwiseMax(0.0);
    if (drop) {
      mask1 = dropout_mask(hd.size(), cfg_.dropout_rate, *dropout_rng);
      hd.array() *= mask1.array();
    }
    const Vector z2 = w2_.value * hd + b2_.value.col(0);
    const auto p = softmax({z2[0], z2[1], z2[2]});
    const int y = index_of(data.labels[row]);
    const double top = z2.maxCoeff();
    const double lse = top + std::log((z2.array() - top).exp().sum());
    total += lse - z2[y];
    if (!accumulate) continue;

    Vector g(3);
    for (int k = 0; k < 3; ++k) g[k] = (p[k] - (k == y ? 1.0 : 0.0)) * inv_n;
    w2_.grad.noalias() += g * hd.transpose();
    b2_.grad.col(0) += g;
    Vector dz1 = w2_.value.transpose() * g;
    if (drop) dz1.array() *= mask1.array();
    dz1 = (z1.array() > 0.0).select(dz1, 0.0);
    w1_.grad.noalias() += dz1 * xd.transpose();
    b1_.grad.col(0) += dz1;

    bool any_head = false;
    for (const auto& h : heads_) any_head = any_head || h;
    if (!any_head) continue;
    Vector dx = w1_.value.transpose() * dz1;
    if (drop) dx.array() *= mask0.array();
    at = 0;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      const auto width = static_cast<Eigen::Index>(specs_[i].output_dim());
      if (heads_[i]) heads_[i]->backward(inputs[i]->sequences[row], *tapes[i], dx.segment(at, width), false);
      at += width;
    }
  }
  return total * inv_n;
}

nn::ParamList StanceModel::params() {
  nn::ParamList out;
  for (auto& h : heads_) {
    if (!h) continue;
    for (auto* p : h->params()) out.push_back(p);
  }
  for (auto* p : {&w1_, &b1_, &w2_, &b2_}) out.push_back(p);
  return out;
}

std::vector<Matrix> StanceModel::snapshot() const {
  auto* self = const_cast<StanceModel*>(this);
  std::vector<Matrix> out;
  for (auto* p : self->params()) out.push_back(p->value);
  return out;
}

void StanceModel::restore(const std::vector<Matrix>& values) {
  auto ps = params();
  if (ps.size() != values.size()) throw Error("fusion: snapshot has wrong parameter count");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i]->value.rows() != values[i].rows() || ps[i]->value.cols() != values[i].cols()) {
      throw Error("fusion: snapshot shape mismatch for " + ps[i]->name);
    }
    ps[i]->value = values[i];
  }
}

TrainHistory StanceModel::train(const FusionData& train, const FusionData* eval) {
  if (train.size() == 0) throw Error("fusion: empty training data");
  check_data(train);
  if (eval) {
    if (eval->size() == 0) throw Error("fusion: empty evaluation data");
    if (eval->labels.size() != eval->size()) throw Error("fusion: evaluation data must be labeled");
    check_data(*eval);
  }
  auto ps = params();
  nn::AdamConfig adam;
  adam.learning_rate = cfg_.optimizer.learning_rate;
  Rng order_rng = derive_rng(cfg_.seed, "order");
  Rng drop_rng = derive_rng(cfg_.seed, "dropout");

  TrainHistory hist;
  std::vector<Matrix> best;
  std::size_t since_best = 0, step = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t bs = cfg_.optimizer.batch_size;

  for (std::size_t epoch = 1; epoch <= cfg_.optimizer.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(order_rng, i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + bs)));
      for (auto* p : ps) p->zero_grad();
      const double l = loss(train, batch, true, &drop_rng);
      if (!std::isfinite(l)) {
        std::ostringstream msg;
        msg << "fusion: non-finite loss at epoch " << epoch << ", batch starting at " << start;
        if (!hist.loss.empty()) msg << " (previous epoch loss " << hist.loss.back() << ")";
        throw Error(msg.str());
      }
      epoch_loss += l * static_cast<double>(batch.size());
      adam_update(ps, adam, ++step);
    }
    hist.loss.push_back(epoch_loss / static_cast<double>(order.size()));

    const auto train_preds = predict(train);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < train.size(); ++i) hits += train_preds[i].label == train.labels[i];
    hist.train_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(train.size()));

    if (!eval) {
      hist.best_epoch = epoch;
      continue;
    }
    std::vector<StanceLabel> labels;
    for (const auto& p : predict(*eval)) labels.push_back(p.label);
    const double f = f_avg(labels, eval->labels);
    hist.eval_f_avg.push_back(f);
    if (hist.best_epoch == 0 || f > hist.best_eval_f_avg) {
      hist.best_eval_f_avg = f;
      hist.best_epoch = epoch;
      best = snapshot();
      since_best = 0;
    } else if (++since_best >= cfg_.optimizer.patience) {
      hist.stopped_early = true;
      break;
    }
  }
  if (!best.empty()) restore(best);
  return hist;
}

void save_predictions(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<Prediction>& preds) {
  if (ids.size() != preds.size()) throw Error("save_predictions: ids and predictions differ in length");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "id,against_p,favor_p,none_p,label\n";
  out.precision(9);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << csv::quote(ids[i]) << ',' << preds[i].probs[0] << ',' << preds[i].probs[1] << ',' << preds[i].probs[2]
        << ',' << to_string(preds[i].label) << '\n';
  }
}

}  // namespace stancelab
