#include "stancelab/netgraph.hpp"

#include "stancelab/csv.hpp"
#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace stancelab {

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Friend: return "friend";
    case Relation::Retweet: return "retweet";
    case Relation::Quote: return "quote";
    case Relation::Reply: return "reply";
  }
  return "friend";
}

std::optional<Relation> parse_relation(std::string_view s) {
  for (auto r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  if (s == "friendship") return Relation::Friend;
  return std::nullopt;
}

// ------------------------------------------------------------ InteractionGraph

std::optional<std::uint32_t> InteractionGraph::index(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? std::nullopt : std::optional(it->second);
}

std::uint32_t InteractionGraph::weight(std::uint32_t src, std::uint32_t dst) const {
  const auto& edges = out_[src];
  auto it = std::lower_bound(edges.begin(), edges.end(), dst,
                             [](const Edge& e, std::uint32_t v) { return e.dst < v; });
  return it != edges.end() && it->dst == dst ? it->weight() : 0;
}

std::uint32_t InteractionGraph::weight(std::string_view src, std::string_view dst) const {
  auto s = index(src);
  auto d = index(dst);
  return s && d ? weight(*s, *d) : 0;
}

InteractionGraph InteractionGraph::from_masks(
    const std::map<std::pair<std::string, std::string>, std::uint8_t>& masks,
    const std::vector<std::string>& extra_nodes) {
  InteractionGraph g;
  std::set<std::string> nodes(extra_nodes.begin(), extra_nodes.end());
  for (const auto& [pair, mask] : masks) {
    nodes.insert(pair.first);
    nodes.insert(pair.second);
  }
  g.ids_.assign(nodes.begin(), nodes.end());
  g.index_.reserve(g.ids_.size());
  for (std::uint32_t i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i], i);
  g.out_.resize(g.ids_.size());
  g.in_degree_.assign(g.ids_.size(), 0);
  // The map iterates in (src, dst) order, so out-lists come out sorted by index.
  for (const auto& [pair, mask] : masks) {
    if (mask == 0) continue;
    const auto s = g.index_.at(pair.first);
    const auto d = g.index_.at(pair.second);
    g.out_[s].push_back({d, mask});
    ++g.in_degree_[d];
    ++g.edge_count_;
  }
  return g;
}

InteractionGraph build_graph(const std::vector<RelationRecord>& records, bool require_friendship,
                             BuildDiagnostics* diagnostics) {
  BuildDiagnostics local;
  BuildDiagnostics& diag = diagnostics ? *diagnostics : local;
  std::map<std::pair<std::string, std::string>, std::uint8_t> masks;
  for (const auto& r : records) {
    if (r.src == r.dst) {
      ++diag.self_loops_dropped;
      continue;
    }
    masks[{r.src, r.dst}] |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(r.relation));
  }
  if (require_friendship) {
    const auto friend_bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(Relation::Friend));
    for (auto it = masks.begin(); it != masks.end();) {
      if (!(it->second & friend_bit)) {
        ++diag.unconditioned_dropped;
        it = masks.erase(it);
      } else {
        ++it;
      }
    }
  }
  return InteractionGraph::from_masks(masks);
}

GraphStats graph_stats(std::size_t node_count, std::size_t edge_count) {
  GraphStats s;
  s.node_count = node_count;
  s.edge_count = edge_count;
  if (node_count > 0) {
    // Every directed edge contributes one in- and one out-degree.
    s.avg_in_degree = static_cast<double>(edge_count) / static_cast<double>(node_count);
    s.avg_out_degree = s.avg_in_degree;
  }
  return s;
}

GraphStats graph_stats(const InteractionGraph& g) {
  std::size_t in_total = 0, out_total = 0;
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    in_total += g.in_degree(v);
    out_total += g.out_edges(v).size();
  }
  GraphStats s;
  s.node_count = g.node_count();
  s.edge_count = g.edge_count();
  if (s.node_count > 0) {
    s.avg_in_degree = static_cast<double>(in_total) / static_cast<double>(s.node_count);
    s.avg_out_degree = static_cast<double>(out_total) / static_cast<double>(s.node_count);
  }
  return s;
}

// ------------------------------------------------------------------------- I/O

std::vector<RelationRecord> load_relations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open relations file: " + path.string());
  csv::Reader reader(in);
  csv::Record rec;
  if (!reader.next(rec)) throw Error("relations file is empty: " + path.string());
  const std::vector<std::string> expected{"src", "dst", "relation"};
  if (rec.fields != expected) {
    throw Error(path.string() + ":1: expected header 'src,dst,relation'");
  }
  std::vector<RelationRecord> out;
  while (reader.next(rec)) {
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    if (rec.fields.size() != 3) {
      throw Error(path.string() + ":" + std::to_string(rec.line) + ": expected 3 fields");
    }
    auto rel = parse_relation(rec.fields[2]);
    if (!rel) {
      throw Error(path.string() + ":" + std::to_string(rec.line) + ": unknown relation '" + rec.fields[2] +
                  "' (valid: friend, retweet, quote, reply)");
    }
    if (rec.fields[0].empty() || rec.fields[1].empty()) {
      throw Error(path.string() + ":" + std::to_string(rec.line) + ": empty user id");
    }
    out.push_back({rec.fields[0], rec.fields[1], *rel});
  }
  return out;
}

void save_relations(const std::vector<RelationRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write relations: " + path.string());
  out << "src,dst,relation\n";
  for (const auto& r : records) {
    out << csv::join({r.src, r.dst, std::string(to_string(r.relation))}) << '\n';
  }
}

std::string edge_list_string(const InteractionGraph& g) {
  std::ostringstream out;
  for (std::uint32_t s = 0; s < g.node_count(); ++s) {
    for (const auto& e : g.out_edges(s)) {
      out << g.id(s) << ' ' << g.id(e.dst) << ' ' << e.weight() << '\n';
    }
  }
  return out.str();
}

void export_edge_list(const InteractionGraph& g, const std::filesystem::path& path) {
  for (const auto& id : g.ids()) {
    if (id.find_first_of(" \t\n\r") != std::string::npos) {
      throw Error("edge list export: node id '" + id + "' contains whitespace");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write edge list: " + path.string());
  out << edge_list_string(g);
}

InteractionGraph parse_edge_list(std::istream& in, const std::string& where) {
  std::map<std::pair<std::string, std::string>, std::uint8_t> masks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string src, dst, extra;
    long weight = 0;
    if (!(fields >> src >> dst >> weight) || (fields >> extra)) {
      throw Error(where + " line " + std::to_string(lineno) + ": expected `src dst weight`");
    }
    if (weight < 1 || weight > static_cast<long>(kAllRelations.size())) {
      throw Error(where + " line " + std::to_string(lineno) + ": weight must be 1.." +
                  std::to_string(kAllRelations.size()));
    }
    if (src == dst) throw Error(where + " line " + std::to_string(lineno) + ": self-loop");
    if (!masks.emplace(std::pair{src, dst}, static_cast<std::uint8_t>((1u << weight) - 1)).second) {
      throw Error(where + " line " + std::to_string(lineno) + ": duplicate edge " + src + " -> " + dst);
    }
  }
  return InteractionGraph::from_masks(masks);
}

InteractionGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read edge list: " + path.string());
  return parse_edge_list(in, path.string());
}

// ----------------------------------------------------------- label propagation

Communities community_detect(const InteractionGraph& g, Relation relation, std::uint64_t seed,
                             int max_iterations) {
  // Undirected adjacency restricted to `relation`, with parallel arcs merged.
  std::vector<std::vector<std::uint32_t>> adj(g.node_count());
  for (std::uint32_t s = 0; s < g.node_count(); ++s) {
    for (const auto& e : g.out_edges(s)) {
      if (!e.has(relation)) continue;
      adj[s].push_back(e.dst);
      adj[e.dst].push_back(s);
    }
  }
  std::vector<std::uint32_t> members;
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    auto& a = adj[v];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    if (!a.empty()) members.push_back(v);
  }
  Communities out;
  if (members.empty()) return out;

  // rank[label] from a seeded permutation; lower rank wins ties.
  std::vector<std::uint32_t> rank(g.node_count());
  std::iota(rank.begin(), rank.end(), 0u);
  Rng rng = derive_rng(seed, static_cast<std::uint64_t>(relation) + 0x1abe1ULL);
  for (std::size_t i = rank.size(); i > 1; --i) std::swap(rank[i - 1], rank[uniform_index(rng, i)]);

  std::vector<std::uint32_t> label(g.node_count());
  std::iota(label.begin(), label.end(), 0u);
  std::vector<std::uint32_t> next = label;
  std::unordered_map<std::uint32_t, std::uint32_t> counts;
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (auto v : members) {
      counts.clear();
      ++counts[label[v]];
      for (auto u : adj[v]) ++counts[label[u]];
      std::uint32_t best = label[v];
      std::uint32_t best_count = 0;
      for (const auto& [l, c] : counts) {
        if (c > best_count || (c == best_count && rank[l] < rank[best])) {
          best = l;
          best_count = c;
        }
      }
      next[v] = best;
      changed |= best != label[v];
    }
    label.swap(next);
    if (!changed) break;
  }

  // Dense ids in order of first appearance over sorted node ids.
  std::unordered_map<std::uint32_t, int> dense;
  for (auto v : members) {
    auto [it, inserted] = dense.emplace(label[v], static_cast<int>(dense.size()));
    out.of.emplace(g.id(v), it->second);
  }
  out.count = static_cast<int>(dense.size());
  return out;
}

CommunityMap detect_all_communities(const InteractionGraph& g, std::uint64_t seed) {
  CommunityMap out;
  for (auto r : kAllRelations) out.emplace(r, community_detect(g, r, seed));
  return out;
}

}  // namespace stancelab
