#include "stancelab/walks.hpp"

#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace stancelab {

std::string_view to_string(WalkStrategy s) {
  switch (s) {
    case WalkStrategy::DeepWalk: return "deepwalk";
    case WalkStrategy::Node2Vec: return "node2vec";
    case WalkStrategy::Struc2Vec: return "struc2vec";
  }
  return "deepwalk";
}

WalkStrategy parse_walk_strategy(std::string_view s) {
  if (s == "deepwalk") return WalkStrategy::DeepWalk;
  if (s == "node2vec") return WalkStrategy::Node2Vec;
  if (s == "struc2vec" || s == "struct2vec") return WalkStrategy::Struc2Vec;
  throw Error("unknown walk strategy '" + std::string(s) + "' (valid: deepwalk, node2vec, struc2vec)");
}

void WalkConfig::validate() const {
  if (walks_per_node < 1) throw Error("walk config: walks_per_node must be >= 1");
  if (walk_length < 2) throw Error("walk config: walk_length must be >= 2");
  if (!(p > 0.0) || !(q > 0.0)) throw Error("walk config: p and q must be > 0");
  if (strategy == WalkStrategy::Struc2Vec && layers < 1) throw Error("walk config: layers must be >= 1");
  if (!(stay_probability > 0.0 && stay_probability <= 1.0)) {
    throw Error("walk config: stay_probability must lie in (0,1]");
  }
}

namespace {

double node2vec_bias(const InteractionGraph& g, std::uint32_t prev, std::uint32_t next, const WalkConfig& cfg) {
  if (next == prev) return 1.0 / cfg.p;
  if (g.has_edge(prev, next)) return 1.0;
  return 1.0 / cfg.q;
}

// Fills `weights` with the unnormalised next-step masses aligned with out_edges(current).
void step_weights(const InteractionGraph& g, std::uint32_t current, std::optional<std::uint32_t> previous,
                  const WalkConfig& cfg, std::vector<double>& weights) {
  const auto& edges = g.out_edges(current);
  weights.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    double w = edges[i].weight();
    if (cfg.strategy == WalkStrategy::Node2Vec && previous) w *= node2vec_bias(g, *previous, edges[i].dst, cfg);
    weights[i] = w;
  }
}

std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

}  // namespace

std::vector<Transition> transition_distribution(const InteractionGraph& g, std::uint32_t current,
                                                std::optional<std::uint32_t> previous, const WalkConfig& cfg) {
  std::vector<double> w;
  step_weights(g, current, previous, cfg, w);
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<Transition> out;
  const auto& edges = g.out_edges(current);
  for (std::size_t i = 0; i < edges.size(); ++i) out.push_back({edges[i].dst, w[i] / total});
  return out;
}

WalkCorpus generate_walks(const InteractionGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.empty()) throw Error("generate_walks: empty graph");
  if (cfg.strategy == WalkStrategy::Struc2Vec) return struc2vec_walks(g, cfg);

  WalkCorpus corpus;
  corpus.ids = g.ids();
  corpus.walks.reserve(g.node_count() * cfg.walks_per_node);
  std::vector<double> weights;
  for (std::uint32_t start = 0; start < g.node_count(); ++start) {
    Rng rng = derive_rng(cfg.seed, g.id(start));
    for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
      std::vector<std::uint32_t> walk{start};
      walk.reserve(cfg.walk_length);
      while (walk.size() < cfg.walk_length) {
        const auto cur = walk.back();
        const auto& edges = g.out_edges(cur);
        if (edges.empty()) break;
        std::optional<std::uint32_t> prev;
        if (walk.size() >= 2) prev = walk[walk.size() - 2];
        step_weights(g, cur, prev, cfg, weights);
        walk.push_back(edges[edges.size() == 1 ? 0 : sample_index(weights, rng)].dst);
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

// ------------------------------------------------------------------------- I/O

std::string walks_to_string(const WalkCorpus& corpus) {
  std::string out;
  for (const auto& w : corpus.walks) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out.push_back(' ');
      out += corpus.ids[w[i]];
    }
    out.push_back('\n');
  }
  return out;
}

void save_walks(const WalkCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write walk file: " + path.string());
  out << walks_to_string(corpus);
}

WalkCorpus load_walks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open walk file: " + path.string());
  WalkCorpus corpus;
  std::unordered_map<std::string, std::uint32_t> index;
  std::string line, tok;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::uint32_t> walk;
    while (ss >> tok) {
      auto [it, inserted] = index.emplace(tok, static_cast<std::uint32_t>(corpus.ids.size()));
      if (inserted) corpus.ids.push_back(tok);
      walk.push_back(it->second);
    }
    if (!walk.empty()) corpus.walks.push_back(std::move(walk));
  }
  return corpus;
}

WalkFileReport validate_walk_file(const std::filesystem::path& path, const InteractionGraph& g,
                                  std::size_t max_length, bool check_edges) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open walk file: " + path.string());
  WalkFileReport report;
  std::string line;
  const auto fail = [&](const std::string& why) {
    report.errors.push_back("line " + std::to_string(report.lines) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++report.lines;
    if (line.empty()) {
      fail("empty line");
      continue;
    }
    if (line.front() == ' ' || line.back() == ' ' || line.find("  ") != std::string::npos ||
        line.find_first_of("\t\r") != std::string::npos) {
      fail("ids must be separated by single spaces");
      continue;
    }
    std::vector<std::uint32_t> walk;
    std::size_t pos = 0;
    bool bad = false;
    while (pos <= line.size()) {
      auto end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      const auto id = std::string_view(line).substr(pos, end - pos);
      auto idx = g.index(id);
      if (!idx) {
        fail("unknown node '" + std::string(id) + "'");
        bad = true;
        break;
      }
      walk.push_back(*idx);
      pos = end + 1;
    }
    if (bad) continue;
    if (walk.size() > max_length) {
      fail("walk has " + std::to_string(walk.size()) + " ids, limit " + std::to_string(max_length));
      continue;
    }
    if (check_edges) {
      for (std::size_t i = 1; i < walk.size(); ++i) {
        if (!g.has_edge(walk[i - 1], walk[i])) {
          fail("no edge " + g.id(walk[i - 1]) + " -> " + g.id(walk[i]));
          break;
        }
      }
    }
  }
  return report;
}

}  // namespace stancelab
