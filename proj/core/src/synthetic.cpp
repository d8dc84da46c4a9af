#include "stancelab/synthetic.hpp"

#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <cstdio>
#include <filesystem>

namespace stancelab {

namespace {

std::string padded(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

StanceLabel draw_label(int community, double p_own, Rng& rng) {
  const StanceLabel own = community == 0 ? StanceLabel::Against : StanceLabel::Favor;
  const StanceLabel other = community == 0 ? StanceLabel::Favor : StanceLabel::Against;
  const double u = uniform01(rng);
  if (u < p_own) return own;
  return u < p_own + (1.0 - p_own) / 2.0 ? other : StanceLabel::None;
}

}  // namespace

SyntheticDataset make_homophily_corpus(const SyntheticSpec& spec) {
  if (spec.users < 4) throw Error("synthetic: need at least 4 users");
  if (spec.train_tweets == 0) throw Error("synthetic: train_tweets must be >= 1");
  if (spec.tokens_per_tweet == 0 || spec.filler_vocab == 0 || spec.cue_words_per_class == 0) {
    throw Error("synthetic: token, filler and cue counts must be >= 1");
  }
  if (spec.embedding_dim == 0) throw Error("synthetic: embedding_dim must be >= 1");
  SyntheticDataset out;
  Rng rng = derive_rng(spec.seed, "homophily");

  for (std::size_t u = 0; u < spec.users; ++u) {
    out.user_ids.push_back(padded("u", u, 4));
    out.community.push_back(u < spec.users / 2 ? 0 : 1);
  }

  for (std::size_t a = 0; a < spec.users; ++a) {
    for (std::size_t b = 0; b < spec.users; ++b) {
      if (a == b) continue;
      const double p = out.community[a] == out.community[b] ? spec.p_within : spec.p_across;
      if (uniform01(rng) >= p) continue;
      out.relations.push_back({out.user_ids[a], out.user_ids[b], Relation::Friend});
      if (uniform01(rng) < spec.p_retweet) out.relations.push_back({out.user_ids[a], out.user_ids[b], Relation::Retweet});
      if (uniform01(rng) < spec.p_reply) out.relations.push_back({out.user_ids[a], out.user_ids[b], Relation::Reply});
    }
  }

  std::vector<std::string> filler, words;
  for (std::size_t i = 0; i < spec.filler_vocab; ++i) filler.push_back(padded("w", i, 4));
  std::array<std::vector<std::string>, 3> cues;
  for (auto l : kAllLabels) {
    for (std::size_t i = 0; i < spec.cue_words_per_class; ++i) {
      std::string w(to_string(l));
      for (auto& c : w) c = static_cast<char>(c - 'A' + 'a');
      cues[index_of(l)].push_back(padded((w + "_").c_str(), i, 2));
    }
  }

  auto make_tweets = [&](std::size_t count, const char* prefix) {
    std::vector<Tweet> tweets;
    for (std::size_t i = 0; i < count; ++i) {
      Tweet t;
      t.id = padded(prefix, i, 5);
      const std::size_t author = uniform_index(rng, spec.users);
      t.author_id = out.user_ids[author];
      t.label = draw_label(out.community[author], spec.community_label_prob, rng);
      std::vector<std::string> toks;
      for (std::size_t k = 0; k < spec.tokens_per_tweet; ++k) toks.push_back(filler[uniform_index(rng, filler.size())]);
      const double u = uniform01(rng);
      int cue_class = -1;
      if (u < spec.lexical_signal) cue_class = index_of(*t.label);
      else if (u < 2 * spec.lexical_signal) cue_class = static_cast<int>(uniform_index(rng, 3));
      if (cue_class >= 0) {
        toks[uniform_index(rng, toks.size())] = cues[cue_class][uniform_index(rng, spec.cue_words_per_class)];
      }
      for (const auto& w : toks) t.text += (t.text.empty() ? "" : " ") + w;
      const std::int64_t ts = 1577836800 + static_cast<std::int64_t>(uniform_index(rng, 86400 * 60));
      t.timestamp = ts;
      t.created_at = std::to_string(ts);
      t.bio = uniform01(rng) < 0.5 ? std::string("bio ") + t.author_id : std::string();
      tweets.push_back(std::move(t));
    }
    return Corpus(std::move(tweets));
  };
  out.train = make_tweets(spec.train_tweets, "t");
  out.test = make_tweets(spec.test_tweets, "s");

  words = filler;
  for (const auto& c : cues) words.insert(words.end(), c.begin(), c.end());
  Matrix vecs(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(spec.embedding_dim));
  Rng erng = derive_rng(spec.seed, "embeddings");
  for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) vecs(i, j) = standard_normal(erng);
  }
  out.embeddings = EmbeddingTable(EmbeddingSource::Custom, std::move(words), std::move(vecs));
  return out;
}

void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "embeddings");
  save_corpus_csv(data.train, dir / "train.csv");
  if (!data.test.empty()) save_corpus_csv(data.test, dir / "test.csv");
  save_relations(data.relations, dir / "relations.csv");
  save_embeddings(data.embeddings, dir / "embeddings" / "custom.vec");
}

}  // namespace stancelab
