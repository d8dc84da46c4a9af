#include "stancelab/skipgram.hpp"

#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stancelab {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

double sgns_loss(const SkipGramModel& model, const SgnsSample& sample) {
  const auto in = model.input.row(sample.center);
  double loss = -log_sigmoid(in.dot(model.output.row(sample.context)));
  for (auto n : sample.negatives) loss -= log_sigmoid(-in.dot(model.output.row(n)));
  return loss;
}

SgnsGradient sgns_gradient(const SkipGramModel& model, const SgnsSample& sample) {
  const Vector in = model.input.row(sample.center).transpose();
  SgnsGradient g;
  g.center = Vector::Zero(in.size());
  const auto add = [&](std::uint32_t target, double label) {
    const Vector out = model.output.row(target).transpose();
    // d/dz of -[label*log s(z) + (1-label)*log s(-z)] = s(z) - label
    const double coef = sigmoid(in.dot(out)) - label;
    g.center += coef * out;
    g.outputs.emplace_back(target, coef * in);
  };
  add(sample.context, 1.0);
  for (auto n : sample.negatives) add(n, 0.0);
  return g;
}

double sgns_sgd_step(SkipGramModel& model, const SgnsSample& sample, double lr, Vector& scratch) {
  auto in = model.input.row(sample.center);
  scratch.setZero(in.size());
  double loss = 0.0;
  const auto apply = [&](std::uint32_t target, double label) {
    auto out = model.output.row(target);
    const double z = in.dot(out);
    loss -= label > 0 ? log_sigmoid(z) : log_sigmoid(-z);
    const double coef = sigmoid(z) - label;
    scratch.noalias() += coef * out.transpose();
    out.noalias() -= (lr * coef) * in;
  };
  apply(sample.context, 1.0);
  for (auto n : sample.negatives) apply(n, 0.0);
  in.noalias() -= lr * scratch.transpose();
  return loss;
}

namespace {

class UnigramSampler {
public:
  explicit UnigramSampler(const std::vector<double>& counts) : cumulative_(counts.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      acc += std::pow(counts[i], 0.75);
      cumulative_[i] = acc;
    }
  }

  std::uint32_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative_.begin());
  }

private:
  std::vector<double> cumulative_;
};

}  // namespace

SkipGramResult train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& cfg) {
  if (cfg.dim < 2) throw Error("skip-gram: dim must be >= 2");
  if (cfg.window == 0) throw Error("skip-gram: window must be >= 1 (window 0 yields no context pairs)");
  if (cfg.epochs == 0) throw Error("skip-gram: epochs must be >= 1");
  if (corpus.walks.empty() || corpus.ids.empty()) throw Error("skip-gram: empty walk corpus");

  const std::size_t vocab = corpus.ids.size();
  const auto dim = static_cast<Eigen::Index>(cfg.dim);
  std::vector<double> counts(vocab, 0.0);
  std::size_t pairs_per_epoch = 0;
  for (const auto& w : corpus.walks) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      counts[w[i]] += 1.0;
      const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
      const std::size_t hi = std::min(w.size() - 1, i + cfg.window);
      pairs_per_epoch += hi - lo;
    }
  }
  if (pairs_per_epoch == 0) throw Error("skip-gram: corpus has no context pairs (all walks have length 1)");

  SkipGramResult result;
  SkipGramModel& m = result.model;
  m.ids = corpus.ids;
  m.input.resize(static_cast<Eigen::Index>(vocab), dim);
  m.output = Matrix::Zero(static_cast<Eigen::Index>(vocab), dim);
  Rng init = derive_rng(cfg.seed, "skipgram-init");
  for (Eigen::Index i = 0; i < m.input.size(); ++i) {
    m.input.data()[i] = (uniform01(init) - 0.5) / static_cast<double>(cfg.dim);
  }

  const UnigramSampler sampler(counts);
  Rng rng = derive_rng(cfg.seed, "skipgram-train");
  std::vector<std::size_t> order(corpus.walks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double total_pairs = static_cast<double>(pairs_per_epoch * cfg.epochs);
  const double min_lr = cfg.learning_rate * 1e-4;
  std::size_t seen = 0;
  SgnsSample sample;
  sample.negatives.reserve(cfg.negatives);
  Vector scratch(dim);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    double loss_sum = 0.0;
    for (auto wi : order) {
      const auto& w = corpus.walks[wi];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(w.size() - 1, i + cfg.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          sample.center = w[i];
          sample.context = w[j];
          sample.negatives.clear();
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            const auto n = sampler(rng);
            if (n != sample.context) sample.negatives.push_back(n);
          }
          const double lr = std::max(min_lr, cfg.learning_rate * (1.0 - static_cast<double>(seen) / total_pairs));
          ++seen;
          loss_sum += sgns_sgd_step(m, sample, lr, scratch);
        }
      }
    }
    result.history.epoch_loss.push_back(loss_sum / static_cast<double>(pairs_per_epoch));
  }

  Matrix vectors = cfg.vectors == NodeVectorKind::Sum ? Matrix(m.input + m.output) : m.input;
  result.embedding = NodeEmbedding(EmbeddingTable(EmbeddingSource::Custom, m.ids, std::move(vectors)));
  return result;
}

Vector user_vector(const NodeEmbedding& emb, std::string_view user_id) {
  if (auto i = emb.table().find(user_id)) return emb.table().row(*i).transpose();
  return Vector::Zero(static_cast<Eigen::Index>(emb.dim()));
}

}  // namespace stancelab
