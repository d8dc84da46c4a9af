#include "stancelab/error.hpp"
#include "stancelab/netgraph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stancelab;
using namespace stancelab::testing;

TEST(BuildGraph, SixUserFixtureWithFriendship) {
  BuildDiagnostics diag;
  const auto g = build_graph(six_user_fixture(), true, &diag);
  EXPECT_EQ(g.ids(), (std::vector<std::string>{"a", "b", "c", "d", "e"}));
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(g.weight("a", "b"), 2u);
  EXPECT_EQ(g.weight("a", "c"), 4u);
  EXPECT_EQ(g.weight("c", "a"), 1u);
  EXPECT_EQ(g.weight("d", "e"), 2u);
  EXPECT_EQ(g.weight("b", "c"), 0u);
  EXPECT_EQ(g.weight("e", "f"), 0u);
  EXPECT_EQ(diag.self_loops_dropped, 1u);
  EXPECT_EQ(diag.unconditioned_dropped, 2u);
}

TEST(BuildGraph, SixUserFixtureWithoutFriendship) {
  const auto g = build_graph(six_user_fixture(), false);
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.edge_count(), 6u);
  EXPECT_EQ(g.weight("b", "c"), 1u);
  EXPECT_EQ(g.weight("e", "f"), 2u);
  const auto ab = g.out_edges(*g.index("a"));
  ASSERT_EQ(ab.size(), 2u);
  EXPECT_TRUE(ab[0].has(Relation::Friend));
  EXPECT_TRUE(ab[0].has(Relation::Retweet));
  EXPECT_FALSE(ab[0].has(Relation::Quote));
}

TEST(BuildGraph, OrderIndependent) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto recs = random_relations(rng, 30, 200);
    const auto g1 = build_graph(recs, trial % 2 == 0);
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto g2 = build_graph(recs, trial % 2 == 0);
    EXPECT_EQ(edge_list_string(g1), edge_list_string(g2));
    EXPECT_EQ(g1.ids(), g2.ids());
  }
}

TEST(BuildGraph, WeightNeverExceedsFour) {
  Rng rng(12);
  const auto g = build_graph(random_relations(rng, 8, 500), false);
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    for (const auto& e : g.out_edges(u)) {
      EXPECT_GE(e.weight(), 1u);
      EXPECT_LE(e.weight(), 4u);
    }
  }
}

TEST(GraphStats, FullScaleCounts) {
  const auto s = graph_stats(669745, 2871791);
  EXPECT_NEAR(s.avg_in_degree, 4.2879, 1e-4);
  EXPECT_NEAR(s.avg_out_degree, 4.2879, 1e-4);
}

TEST(GraphStats, SingleEdgeAndEmpty) {
  const auto g = build_graph({{"x", "y", Relation::Friend}});
  const auto s = graph_stats(g);
  EXPECT_EQ(s.node_count, 2u);
  EXPECT_DOUBLE_EQ(s.avg_in_degree, 0.5);
  EXPECT_DOUBLE_EQ(s.avg_out_degree, 0.5);
  const auto z = graph_stats(InteractionGraph{});
  EXPECT_EQ(z.avg_in_degree, 0.0);
  EXPECT_EQ(z.edge_count, 0u);
}

TEST(GraphStats, HandshakeIdentity) {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = build_graph(random_relations(rng, 5 + uniform_index(rng, 50), 300), trial % 2 == 0);
    const auto s = graph_stats(g);
    EXPECT_EQ(s.avg_in_degree, s.avg_out_degree);
    std::size_t in_sum = 0;
    for (std::uint32_t u = 0; u < g.node_count(); ++u) in_sum += g.in_degree(u);
    EXPECT_EQ(in_sum, g.edge_count());
  }
}

namespace {

std::vector<RelationRecord> undirected(const std::vector<std::pair<std::string, std::string>>& pairs, Relation r) {
  std::vector<RelationRecord> out;
  for (const auto& [a, b] : pairs) {
    out.push_back({a, b, Relation::Friend});
    out.push_back({a, b, r});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> clique(const std::string& prefix, int n) {
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out.emplace_back(prefix + std::to_string(i), prefix + std::to_string(j));
  }
  return out;
}

// Newman modularity of a partition of the undirected simple graph given by `pairs`.
double modularity(const std::vector<std::pair<std::string, std::string>>& pairs,
                  const std::function<int(const std::string&)>& comm) {
  std::map<std::string, double> deg;
  const double m = static_cast<double>(pairs.size());
  double inside = 0;
  for (const auto& [a, b] : pairs) {
    deg[a] += 1;
    deg[b] += 1;
    if (comm(a) == comm(b)) inside += 1;
  }
  std::map<int, double> tot;
  for (const auto& [v, d] : deg) tot[comm(v)] += d;
  double expected = 0;
  for (const auto& [c, t] : tot) expected += (t / (2 * m)) * (t / (2 * m));
  return inside / m - expected;
}

}  // namespace

TEST(Communities, TwoTrianglesAndClique) {
  auto pairs = clique("a", 3);
  const auto more = clique("b", 3);
  pairs.insert(pairs.end(), more.begin(), more.end());
  const auto g = build_graph(undirected(pairs, Relation::Retweet));
  const auto c = community_detect(g, Relation::Retweet, 5);
  EXPECT_EQ(c.count, 2);
  EXPECT_EQ(c.of.at("a0"), c.of.at("a2"));
  EXPECT_NE(c.of.at("a0"), c.of.at("b0"));

  const auto k = community_detect(build_graph(undirected(clique("k", 6), Relation::Reply)), Relation::Reply, 5);
  EXPECT_EQ(k.count, 1);
  EXPECT_EQ(k.of.size(), 6u);
}

TEST(Communities, EmptySubgraphAndDenseIds) {
  const auto g = build_graph(undirected(clique("a", 4), Relation::Retweet));
  const auto none = community_detect(g, Relation::Quote);
  EXPECT_EQ(none.count, 0);
  EXPECT_TRUE(none.of.empty());

  Rng rng(14);
  const auto r = build_graph(random_relations(rng, 40, 400), false);
  const auto c = community_detect(r, Relation::Retweet, 3);
  std::set<int> ids;
  for (const auto& [u, id] : c.of) ids.insert(id);
  ASSERT_EQ(static_cast<int>(ids.size()), c.count);
  if (c.count > 0) {
    EXPECT_EQ(*ids.rbegin(), c.count - 1);
  }
}

TEST(Communities, BarbellSplitsAtBridge) {
  auto pairs = clique("l", 10);
  const auto right = clique("r", 10);
  pairs.insert(pairs.end(), right.begin(), right.end());
  pairs.emplace_back("l0", "r0");
  const auto g = build_graph(undirected(pairs, Relation::Retweet));
  const double oracle_q = modularity(pairs, [](const std::string& v) { return v[0] == 'l' ? 0 : 1; });

  int split = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = community_detect(g, Relation::Retweet, seed);
    if (c.of.at("l0") == c.of.at("r0")) continue;
    ++split;
    const double q = modularity(pairs, [&](const std::string& v) { return c.of.at(v); });
    EXPECT_GE(q, oracle_q - 1e-12) << "seed " << seed;
  }
  EXPECT_GE(split, 95);
}

TEST(Communities, Deterministic) {
  Rng rng(15);
  const auto g = build_graph(random_relations(rng, 60, 600), false);
  for (auto r : kAllRelations) {
    EXPECT_EQ(community_detect(g, r, 9).of, community_detect(g, r, 9).of);
  }
}

TEST(Relations, CsvRoundTrip) {
  const auto p = std::filesystem::temp_directory_path() / "stancelab_rel.csv";
  save_relations(six_user_fixture(), p);
  const auto back = load_relations(p);
  ASSERT_EQ(back.size(), six_user_fixture().size());
  EXPECT_EQ(edge_list_string(build_graph(back)), edge_list_string(build_graph(six_user_fixture())));
}

TEST(Relations, BadRelationNamed) {
  const auto p = std::filesystem::temp_directory_path() / "stancelab_rel_bad.csv";
  std::ofstream(p) << "src,dst,relation\na,b,friend\na,b,likes\n";
  try {
    load_relations(p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("likes"), std::string::npos) << e.what();
  }
}
