#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stancelab {

enum class Relation : std::uint8_t { Friend = 0, Retweet = 1, Quote = 2, Reply = 3 };

inline constexpr std::array<Relation, 4> kAllRelations{Relation::Friend, Relation::Retweet,
                                                       Relation::Quote, Relation::Reply};

std::string_view to_string(Relation r);
std::optional<Relation> parse_relation(std::string_view s);

struct RelationRecord {
  std::string src;
  std::string dst;
  Relation relation = Relation::Friend;
};

// Directed weighted user graph. Nodes are kept in lexicographic id order and
// out-neighbours sorted by node index, so the structure depends only on the
// set of records, never their order.
class InteractionGraph {
public:
  struct Edge {
    std::uint32_t dst;
    std::uint8_t relations;  // bitmask over Relation
    std::uint32_t weight() const { return static_cast<std::uint32_t>(__builtin_popcount(relations)); }
    bool has(Relation r) const { return relations & (1u << static_cast<unsigned>(r)); }
  };

  InteractionGraph() = default;

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return ids_.empty(); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::uint32_t node) const { return ids_[node]; }
  std::optional<std::uint32_t> index(std::string_view id) const;

  const std::vector<Edge>& out_edges(std::uint32_t node) const { return out_[node]; }
  std::size_t in_degree(std::uint32_t node) const { return in_degree_[node]; }

  // 0 when the edge is absent.
  std::uint32_t weight(std::string_view src, std::string_view dst) const;
  std::uint32_t weight(std::uint32_t src, std::uint32_t dst) const;
  bool has_edge(std::uint32_t src, std::uint32_t dst) const { return weight(src, dst) > 0; }

  // Assembles from (src, dst) -> relation bitmask; used by build_graph and loaders.
  static InteractionGraph from_masks(const std::map<std::pair<std::string, std::string>, std::uint8_t>& masks,
                                     const std::vector<std::string>& extra_nodes = {});

private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::size_t> in_degree_;
  std::size_t edge_count_ = 0;
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double avg_in_degree = 0.0;
  double avg_out_degree = 0.0;
};

struct BuildDiagnostics {
  std::size_t self_loops_dropped = 0;
  std::size_t unconditioned_dropped = 0;  // pairs without a friend relation
};

// Weight of (u,v) = number of distinct relation types present. With
// require_friendship, pairs lacking a friend relation are dropped.
InteractionGraph build_graph(const std::vector<RelationRecord>& records, bool require_friendship = true,
                             BuildDiagnostics* diagnostics = nullptr);

GraphStats graph_stats(const InteractionGraph& g);
GraphStats graph_stats(std::size_t node_count, std::size_t edge_count);

// CSV with header `src,dst,relation`.
std::vector<RelationRecord> load_relations(const std::filesystem::path& path);
void save_relations(const std::vector<RelationRecord>& records, const std::filesystem::path& path);

// `src dst weight` per line, sorted by (src, dst) id.
void export_edge_list(const InteractionGraph& g, const std::filesystem::path& path);
std::string edge_list_string(const InteractionGraph& g);

// Inverse of export_edge_list. Relation identities are not stored in the
// format, so an edge of weight w comes back with the first w relations set.
InteractionGraph load_edge_list(const std::filesystem::path& path);
InteractionGraph parse_edge_list(std::istream& in, const std::string& where = "edge list");

struct Communities {
  std::unordered_map<std::string, int> of;  // user id -> community id, dense from 0
  int count = 0;

  std::optional<int> find(const std::string& user) const {
    auto it = of.find(user);
    return it == of.end() ? std::nullopt : std::optional(it->second);
  }
};

// Synchronous label propagation over the undirected view of the edges that
// carry `relation`. Each node adopts the most frequent label among itself and
// its neighbours; ties go to the label ranked first by a seeded permutation.
Communities community_detect(const InteractionGraph& g, Relation relation, std::uint64_t seed = 0,
                             int max_iterations = 100);

using CommunityMap = std::map<Relation, Communities>;

CommunityMap detect_all_communities(const InteractionGraph& g, std::uint64_t seed = 0);

}  // namespace stancelab
