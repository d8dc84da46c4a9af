#pragma once

#include "stancelab/corpus.hpp"
#include "stancelab/feature_block.hpp"
#include "stancelab/netgraph.hpp"
#include "stancelab/pca.hpp"

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stancelab {

using TokenDocs = std::vector<std::vector<std::string>>;

// Sorted unique terms with contiguous positions.
class Vocabulary {
public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  // Terms of the training documents seen at least min_count times.
  static Vocabulary build(const TokenDocs& train_docs, std::size_t min_count = 1);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::optional<std::size_t> find(std::string_view term) const;

private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Raw counts; out-of-vocabulary tokens are ignored.
FeatureBlock unigram_features(const TokenDocs& docs, const Vocabulary& vocab);

// idf(t) = ln((1 + N) / (1 + df(t))) + 1 with N and df frozen from the training docs.
struct TfidfModel {
  Vocabulary vocab;
  Vector idf;
  std::size_t train_docs = 0;
};

TfidfModel fit_tfidf(const TokenDocs& train_docs, Vocabulary vocab);
// Same idf rule over an arbitrary training count matrix (rows = docs).
Vector fit_idf(const Matrix& train_counts);
FeatureBlock tfidf_features(const TokenDocs& docs, const TfidfModel& model);
FeatureBlock apply_idf(FeatureBlock counts, const Vector& idf, std::string name);

// Character n-grams over UTF-8 code points, lo <= n <= hi.
struct CharGramRange {
  std::size_t lo = 2;
  std::size_t hi = 5;
};

std::vector<std::string> char_ngrams(std::string_view text, CharGramRange range);

// Keeps the max_features most frequent training n-grams (0 = all); ties by term.
Vocabulary fit_chargram_vocabulary(const std::vector<std::string>& train_texts, CharGramRange range,
                                   std::size_t max_features = 0);
FeatureBlock chargram_features(const std::vector<std::string>& texts, const Vocabulary& vocab,
                               CharGramRange range);

// Structural vector layout, in column order:
//   punct(1) hashtags(1) length(1)
//   community one-hot for quote, reply, retweet, friend (width = community count)
//   bio(2: present flag, bio token count) hour(24 one-hot, UTC)
struct StructuralLayout {
  std::vector<std::pair<std::string, std::size_t>> groups;  // (name, width)
  std::size_t dims() const;
  std::size_t offset(std::string_view group) const;
  std::size_t width(std::string_view group) const;
};

inline constexpr std::array<Relation, 4> kStructuralRelationOrder{Relation::Quote, Relation::Reply,
                                                                  Relation::Retweet, Relation::Friend};

StructuralLayout structural_layout(const CommunityMap& communities);
Vector structural_features(const Tweet& tweet, const CommunityMap& communities);

int punctuation_count(std::string_view text);
int hashtag_count(std::string_view text);
int mention_count(std::string_view text);

// The fourteen named frequency features; names follow the experiment settings grammar.
inline constexpr std::array<std::string_view, 14> kFrequencyFeatureNames{
    "unigram",
    "Tfidf_unigram",
    "chargrams",
    "Tfidf_chargrams",
    "puntuactionmarks",
    "hashtags",
    "mentions",
    "length",
    "network_quote_community",
    "network_reply_community",
    "network_retweet_community",
    "network_friend_community",
    "userinfobio",
    "tweetinfocreateat",
};

bool is_frequency_feature(std::string_view name);

struct FrequencyOptions {
  CharGramRange chargram_range{};
  std::size_t chargram_max_features = 5000;
  std::size_t unigram_min_count = 1;
};

// Fits vocabularies / idf on the training corpus once; transform() never mutates them.
class FrequencyExtractor {
public:
  FrequencyExtractor(std::vector<std::string> features, FrequencyOptions options = {});

  // `corpus` must be tokenized.
  void fit(const Corpus& train, const CommunityMap& communities);
  FeatureBlock transform(const Corpus& corpus) const;

  const std::vector<std::string>& features() const { return features_; }
  bool fitted() const { return fitted_; }

private:
  std::vector<std::string> features_;
  FrequencyOptions options_;
  bool fitted_ = false;
  Vocabulary unigram_vocab_;
  Vector unigram_idf_;
  Vocabulary chargram_vocab_;
  Vector chargram_idf_;
  CommunityMap communities_;
  StructuralLayout layout_;
};

}  // namespace stancelab
