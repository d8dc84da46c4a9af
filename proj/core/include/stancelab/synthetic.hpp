#pragma once

#include "stancelab/corpus.hpp"
#include "stancelab/embedfeat.hpp"
#include "stancelab/netgraph.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stancelab {

// Homophily corpus: users split into two communities whose members mostly
// share one stance (community 0 AGAINST, community 1 FAVOR) and interact
// mostly with each other. Tweets carry a weak lexical cue for their label.
struct SyntheticSpec {
  std::size_t users = 200;
  std::size_t train_tweets = 2000;
  std::size_t test_tweets = 400;
  std::size_t tokens_per_tweet = 10;
  std::size_t filler_vocab = 400;
  std::size_t cue_words_per_class = 15;
  // P(tweet label = the author's community stance); the rest splits evenly
  // between the other stance and NONE.
  double community_label_prob = 0.75;
  // P(a tweet contains one cue word of its own label); otherwise it contains
  // a cue word of a random class with the same probability.
  double lexical_signal = 0.3;
  double p_within = 0.08;   // per ordered pair, friendship inside a community
  double p_across = 0.004;  // per ordered pair, friendship across communities
  double p_retweet = 0.5;   // given friendship
  double p_reply = 0.3;     // given friendship
  std::size_t embedding_dim = 16;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  Corpus train;
  Corpus test;
  std::vector<RelationRecord> relations;
  EmbeddingTable embeddings;          // Custom source over every generated word
  std::vector<std::string> user_ids;  // u000 ...
  std::vector<int> community;         // parallel to user_ids
};

SyntheticDataset make_homophily_corpus(const SyntheticSpec& spec);

// Data-directory layout read by the experiment runner:
// train.csv, test.csv, relations.csv, embeddings/custom.vec.
void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace stancelab
