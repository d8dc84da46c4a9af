#include "stancelab/walks.hpp"

#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stancelab {

double dtw_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const double inf = std::numeric_limits<double>::infinity();
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return inf;
  std::vector<double> prev(b.size() + 1, inf), cur(b.size() + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::vector<std::vector<std::uint32_t>> undirected_adjacency(const InteractionGraph& g) {
  std::vector<std::vector<std::uint32_t>> adj(g.node_count());
  for (std::uint32_t s = 0; s < g.node_count(); ++s) {
    for (const auto& e : g.out_edges(s)) {
      adj[s].push_back(e.dst);
      adj[e.dst].push_back(s);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

// rings[v][k] = sorted degrees of the nodes at undirected distance exactly k from v.
std::vector<std::vector<std::vector<double>>> degree_rings(const std::vector<std::vector<std::uint32_t>>& adj,
                                                           std::size_t layers) {
  const std::size_t n = adj.size();
  std::vector<std::vector<std::vector<double>>> rings(n, std::vector<std::vector<double>>(layers));
  std::vector<int> dist(n, -1);
  std::vector<std::uint32_t> frontier, next, touched;
  for (std::uint32_t v = 0; v < n; ++v) {
    frontier = {v};
    touched = {v};
    dist[v] = 0;
    for (std::size_t k = 0; k < layers && !frontier.empty(); ++k) {
      for (auto u : frontier) rings[v][k].push_back(static_cast<double>(adj[u].size()));
      std::sort(rings[v][k].begin(), rings[v][k].end());
      next.clear();
      for (auto u : frontier) {
        for (auto w : adj[u]) {
          if (dist[w] < 0) {
            dist[w] = static_cast<int>(k) + 1;
            next.push_back(w);
            touched.push_back(w);
          }
        }
      }
      frontier.swap(next);
    }
    for (auto u : touched) dist[u] = -1;
  }
  return rings;
}

}  // namespace

std::vector<Matrix> struc2vec_distances(const InteractionGraph& g, std::size_t layers) {
  if (layers < 1) throw Error("struc2vec: layers must be >= 1");
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const auto rings = degree_rings(undirected_adjacency(g), layers);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Matrix> f(layers, Matrix::Constant(n, n, inf));
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u; v < n; ++v) {
      double acc = 0.0;
      for (std::size_t k = 0; k < layers; ++k) {
        const auto& ru = rings[static_cast<std::size_t>(u)][k];
        const auto& rv = rings[static_cast<std::size_t>(v)][k];
        if (ru.empty() || rv.empty()) break;  // undefined from here on
        acc += dtw_distance(ru, rv);
        f[k](u, v) = acc;
        f[k](v, u) = acc;
      }
    }
  }
  return f;
}

WalkCorpus struc2vec_walks(const InteractionGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.empty()) throw Error("struc2vec_walks: empty graph");
  const std::size_t n = g.node_count();
  const std::size_t layers = cfg.layers;
  const auto dist = struc2vec_distances(g, layers);

  // Per-layer transition weights exp(-f_k) over v != u, and the layer-up probability.
  std::vector<Matrix> weight(layers);
  std::vector<std::vector<double>> up_prob(layers, std::vector<double>(n, 0.0));
  std::vector<std::vector<char>> has_moves(layers, std::vector<char>(n, 0));
  for (std::size_t k = 0; k < layers; ++k) {
    weight[k] = (-dist[k].array()).exp().matrix();
    weight[k].diagonal().setZero();
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < weight[k].size(); ++i) {
      const double w = weight[k].data()[i];
      if (w > 0) {
        sum += w;
        ++count;
      }
    }
    const double avg = count ? sum / static_cast<double>(count) : 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      const auto row = weight[k].row(static_cast<Eigen::Index>(u));
      has_moves[k][u] = row.sum() > 0.0;
      const double gamma = static_cast<double>((row.array() > avg).count());
      const double l = std::log(gamma + std::exp(1.0));
      up_prob[k][u] = l / (l + 1.0);
    }
  }

  WalkCorpus corpus;
  corpus.ids = g.ids();
  std::vector<double> w(n);
  for (std::uint32_t start = 0; start < n; ++start) {
    Rng rng = derive_rng(cfg.seed, g.id(start));
    for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
      std::vector<std::uint32_t> walk{start};
      std::size_t layer = 0;
      std::size_t guard = 0;
      while (walk.size() < cfg.walk_length && guard++ < 20 * cfg.walk_length) {
        const auto u = walk.back();
        const bool can_up = layer + 1 < layers && has_moves[layer + 1][u];
        const bool can_down = layer > 0;
        const bool can_stay = has_moves[layer][u];
        if (!can_stay && !can_up && !can_down) break;
        if (can_stay && (uniform01(rng) < cfg.stay_probability || (!can_up && !can_down))) {
          const auto row = weight[layer].row(u);
          for (std::size_t v = 0; v < n; ++v) w[v] = row[static_cast<Eigen::Index>(v)];
          double total = row.sum();
          double x = uniform01(rng) * total;
          std::uint32_t next = 0;
          for (std::size_t v = 0; v < n; ++v) {
            if (w[v] <= 0) continue;
            next = static_cast<std::uint32_t>(v);
            if (x < w[v]) break;
            x -= w[v];
          }
          walk.push_back(next);
          continue;
        }
        if (can_up && (!can_down || uniform01(rng) < up_prob[layer][u])) ++layer;
        else if (can_down) --layer;
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

}  // namespace stancelab
