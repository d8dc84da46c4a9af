#pragma once

// Independent oracles and fixtures shared by the unit and acceptance tests.
// The oracles are written straight from the formulas, without calling into
// the library code they check.

#include "stancelab/feature_block.hpp"
#include "stancelab/label.hpp"
#include "stancelab/netgraph.hpp"
#include "stancelab/nn.hpp"
#include "stancelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace stancelab::testing {

using Docs = std::vector<std::vector<std::string>>;

inline Docs random_docs(Rng& rng, std::size_t max_docs, std::size_t max_terms, std::size_t max_len) {
  const std::size_t n = 1 + uniform_index(rng, max_docs);
  const std::size_t terms = 1 + uniform_index(rng, max_terms);
  Docs docs(n);
  for (auto& d : docs) {
    const std::size_t len = uniform_index(rng, max_len + 1);
    for (std::size_t i = 0; i < len; ++i) d.push_back("t" + std::to_string(uniform_index(rng, terms)));
  }
  return docs;
}

inline std::vector<std::string> sorted_terms(const Docs& docs) {
  std::set<std::string> s;
  for (const auto& d : docs) s.insert(d.begin(), d.end());
  return {s.begin(), s.end()};
}

inline std::vector<std::vector<double>> count_oracle(const Docs& docs, const std::vector<std::string>& vocab) {
  std::vector<std::vector<double>> out(docs.size(), std::vector<double>(vocab.size(), 0.0));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < vocab.size(); ++j) {
      for (const auto& tok : docs[i]) out[i][j] += tok == vocab[j] ? 1.0 : 0.0;
    }
  }
  return out;
}

// tf * (ln((1+N)/(1+df)) + 1), df and N from `train`.
inline std::vector<std::vector<double>> tfidf_oracle(const Docs& train, const Docs& docs,
                                                     const std::vector<std::string>& vocab) {
  const double n = static_cast<double>(train.size());
  std::vector<double> idf(vocab.size());
  for (std::size_t j = 0; j < vocab.size(); ++j) {
    double df = 0;
    for (const auto& d : train) df += std::find(d.begin(), d.end(), vocab[j]) != d.end() ? 1.0 : 0.0;
    idf[j] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
  }
  auto counts = count_oracle(docs, vocab);
  for (auto& row : counts) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] *= idf[j];
  }
  return counts;
}

// Code points of a UTF-8 string (ASCII-only fixtures need nothing fancier,
// but multi-byte sequences are kept whole).
inline std::vector<std::string> code_points(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

inline std::map<std::string, double> chargram_oracle(const std::string& text, std::size_t lo, std::size_t hi) {
  std::map<std::string, double> counts;
  const auto cps = code_points(text);
  for (std::size_t n = lo; n <= hi; ++n) {
    for (std::size_t start = 0; start + n <= cps.size(); ++start) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += cps[start + k];
      counts[g] += 1.0;
    }
  }
  return counts;
}

inline double f_avg_oracle(const std::vector<StanceLabel>& pred, const std::vector<StanceLabel>& gold) {
  auto f1 = [&](StanceLabel c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == c && gold[i] == c) tp += 1;
      if (pred[i] == c && gold[i] != c) fp += 1;
      if (pred[i] != c && gold[i] == c) fn += 1;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  };
  return (f1(StanceLabel::Against) + f1(StanceLabel::Favor)) / 2.0;
}

inline std::vector<StanceLabel> random_labels(Rng& rng, std::size_t n) {
  std::vector<StanceLabel> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(kAllLabels[uniform_index(rng, 3)]);
  return out;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * standard_normal(rng);
  return m;
}

// Six users, mixed relations:
//   a->b friend, retweet x2          weight 2
//   a->c friend, retweet, quote, reply weight 4
//   b->c retweet only                 dropped with require_friendship
//   c->a friend                       weight 1
//   d->e friend, reply                weight 2
//   e->f quote, reply                 dropped with require_friendship
//   f->f friend                       self-loop, dropped
inline std::vector<RelationRecord> six_user_fixture() {
  return {
      {"a", "b", Relation::Friend},  {"a", "b", Relation::Retweet}, {"a", "b", Relation::Retweet},
      {"a", "c", Relation::Friend},  {"a", "c", Relation::Retweet}, {"a", "c", Relation::Quote},
      {"a", "c", Relation::Reply},   {"b", "c", Relation::Retweet}, {"c", "a", Relation::Friend},
      {"d", "e", Relation::Friend},  {"d", "e", Relation::Reply},   {"e", "f", Relation::Quote},
      {"e", "f", Relation::Reply},   {"f", "f", Relation::Friend},
  };
}

inline std::vector<RelationRecord> random_relations(Rng& rng, std::size_t users, std::size_t records) {
  std::vector<RelationRecord> out;
  for (std::size_t i = 0; i < records; ++i) {
    out.push_back({"u" + std::to_string(uniform_index(rng, users)), "u" + std::to_string(uniform_index(rng, users)),
                   kAllRelations[uniform_index(rng, 4)]});
  }
  return out;
}

// Ten nodes with weighted directed edges; every node has out-edges.
inline InteractionGraph ten_node_fixture() {
  std::map<std::pair<std::string, std::string>, std::uint8_t> masks;
  auto add = [&](int s, int d, std::uint8_t m) { masks[{"n" + std::to_string(s), "n" + std::to_string(d)}] = m; };
  for (int i = 0; i < 10; ++i) {
    add(i, (i + 1) % 10, 0b0001);
    add(i, (i + 3) % 10, 0b0011);
    if (i % 2 == 0) add(i, (i + 5) % 10, 0b0111);
    if (i % 3 == 0) add((i + 1) % 10, i, 0b1111);
  }
  return InteractionGraph::from_masks(masks);
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps entries whose
// true gradient is ~0 from dividing rounding noise by ~0.
inline double rel_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Central differences on every entry of every param (up to `max_per_param`
// evenly spaced entries). `loss` recomputes the scalar from current values;
// `backprop` zeroes and fills the analytic grads.
inline GradCheck check_param_gradients(const nn::ParamList& params, const std::function<double()>& loss,
                                       const std::function<void()>& backprop, double h = 1e-5,
                                       std::size_t max_per_param = 60) {
  for (auto* p : params) p->zero_grad();
  backprop();
  GradCheck out;
  for (auto* p : params) {
    const auto n = static_cast<std::size_t>(p->value.size());
    const std::size_t stride = std::max<std::size_t>(1, n / max_per_param);
    for (std::size_t i = 0; i < n; i += stride) {
      double& x = p->value.data()[i];
      const double keep = x;
      x = keep + h;
      const double up = loss();
      x = keep - h;
      const double down = loss();
      x = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad.data()[i];
      const double err = rel_error(analytic, numeric);
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = p->name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic) + " numeric " +
                    std::to_string(numeric);
      }
    }
  }
  return out;
}

}  // namespace stancelab::testing
