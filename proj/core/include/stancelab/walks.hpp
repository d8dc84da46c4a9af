#pragma once

#include "stancelab/feature_block.hpp"
#include "stancelab/netgraph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stancelab {

enum class WalkStrategy { DeepWalk, Node2Vec, Struc2Vec };

std::string_view to_string(WalkStrategy s);
WalkStrategy parse_walk_strategy(std::string_view s);  // deepwalk | node2vec | struc2vec

struct WalkConfig {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 80;
  WalkStrategy strategy = WalkStrategy::DeepWalk;
  double p = 1.0;  // node2vec return parameter
  double q = 1.0;  // node2vec in-out parameter
  std::size_t layers = 3;           // struc2vec layer cap
  double stay_probability = 0.3;    // struc2vec: probability of a within-layer move
  std::uint64_t seed = 0;

  void validate() const;
};

// Walks over node indices into `ids`.
struct WalkCorpus {
  std::vector<std::string> ids;
  std::vector<std::vector<std::uint32_t>> walks;

  std::size_t size() const { return walks.size(); }
};

// Reference walker. Start nodes are all graph nodes in id order; each start
// node emits walks_per_node walks from its own RNG stream derived from
// (seed, node id). Walks stop early at nodes without out-edges.
//   deepwalk: next node drawn proportional to out-edge weight
//   node2vec: weight x {1/p if returning, 1 if adjacent to previous, 1/q otherwise}
WalkCorpus generate_walks(const InteractionGraph& g, const WalkConfig& cfg);

struct Transition {
  std::uint32_t next;
  double probability;
};

// Exact next-step distribution from `current`; `previous` is ignored by deepwalk
// and by the first node2vec step (pass no value).
std::vector<Transition> transition_distribution(const InteractionGraph& g, std::uint32_t current,
                                                std::optional<std::uint32_t> previous, const WalkConfig& cfg);

// Simplified struc2vec: layer-k distance f_k(u,v) = f_{k-1}(u,v) + DTW over the
// sorted degree sequences of the rings at distance k (element cost |a-b|,
// undirected degrees). Entries are +inf where either ring is empty.
std::vector<Matrix> struc2vec_distances(const InteractionGraph& g, std::size_t layers);

// Walks over the multilayer similarity graph (weights exp(-f_k)). Only
// within-layer moves append a node, so consecutive pairs share a layer.
WalkCorpus struc2vec_walks(const InteractionGraph& g, const WalkConfig& cfg);

double dtw_distance(const std::vector<double>& a, const std::vector<double>& b);

// One walk per line, node ids separated by single spaces.
void save_walks(const WalkCorpus& corpus, const std::filesystem::path& path);
std::string walks_to_string(const WalkCorpus& corpus);
WalkCorpus load_walks(const std::filesystem::path& path);

struct WalkFileReport {
  std::size_t lines = 0;
  std::vector<std::string> errors;  // "line N: reason"
  bool ok() const { return errors.empty(); }
};

// Grammar check shared by every walker: non-empty lines of single-space
// separated ids, at most max_length ids, every id a graph node and, when
// check_edges is set, every consecutive pair a graph edge.
WalkFileReport validate_walk_file(const std::filesystem::path& path, const InteractionGraph& g,
                                  std::size_t max_length, bool check_edges = true);

}  // namespace stancelab
