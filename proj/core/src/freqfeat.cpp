#include "stancelab/freqfeat.hpp"

#include "stancelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stancelab {

// ------------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
}

Vocabulary Vocabulary::build(const TokenDocs& train_docs, std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : train_docs) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::string> terms;
  terms.reserve(counts.size());
  for (const auto& [term, n] : counts) {
    if (n >= min_count) terms.push_back(term);
  }
  return Vocabulary(std::move(terms));
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? std::nullopt : std::optional(it->second);
}

// ---------------------------------------------------------------- unigram/tfidf

FeatureBlock unigram_features(const TokenDocs& docs, const Vocabulary& vocab) {
  FeatureBlock block;
  block.name = "unigram";
  block.matrix = Matrix::Zero(static_cast<Eigen::Index>(docs.size()),
                              static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& tok : docs[i]) {
      if (auto j = vocab.find(tok)) block.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j)) += 1.0;
    }
  }
  block.ordering = {"unigram:" + std::to_string(vocab.size())};
  return block;
}

Vector fit_idf(const Matrix& train_counts) {
  const double n = static_cast<double>(train_counts.rows());
  Vector idf(train_counts.cols());
  for (Eigen::Index j = 0; j < train_counts.cols(); ++j) {
    const double df = static_cast<double>((train_counts.col(j).array() > 0.0).count());
    idf[j] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
  }
  return idf;
}

TfidfModel fit_tfidf(const TokenDocs& train_docs, Vocabulary vocab) {
  TfidfModel model;
  model.train_docs = train_docs.size();
  model.idf = fit_idf(unigram_features(train_docs, vocab).matrix);
  model.vocab = std::move(vocab);
  return model;
}

FeatureBlock apply_idf(FeatureBlock counts, const Vector& idf, std::string name) {
  if (counts.matrix.cols() != idf.size()) throw Error("apply_idf: dimension mismatch");
  counts.matrix = counts.matrix * idf.asDiagonal();
  counts.name = name;
  counts.ordering = {name + ":" + std::to_string(idf.size())};
  return counts;
}

FeatureBlock tfidf_features(const TokenDocs& docs, const TfidfModel& model) {
  return apply_idf(unigram_features(docs, model.vocab), model.idf, "Tfidf_unigram");
}

// -------------------------------------------------------------------- chargrams

namespace {

std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte: treat as its own unit
}

std::vector<std::size_t> codepoint_starts(std::string_view s) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < s.size();) {
    starts.push_back(i);
    i += std::min(utf8_len(static_cast<unsigned char>(s[i])), s.size() - i);
  }
  starts.push_back(s.size());
  return starts;
}

void check_range(CharGramRange r) {
  if (r.lo < 1 || r.lo > r.hi) {
    throw Error("char-gram range must satisfy 1 <= lo <= hi, got (" + std::to_string(r.lo) + "," +
                std::to_string(r.hi) + ")");
  }
}

}  // namespace

std::vector<std::string> char_ngrams(std::string_view text, CharGramRange range) {
  check_range(range);
  const auto starts = codepoint_starts(text);
  const std::size_t cps = starts.size() - 1;
  std::vector<std::string> out;
  for (std::size_t n = range.lo; n <= range.hi && n <= cps; ++n) {
    for (std::size_t i = 0; i + n <= cps; ++i) {
      out.emplace_back(text.substr(starts[i], starts[i + n] - starts[i]));
    }
  }
  return out;
}

Vocabulary fit_chargram_vocabulary(const std::vector<std::string>& train_texts, CharGramRange range,
                                   std::size_t max_features) {
  check_range(range);
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : train_texts) {
    for (auto& g : char_ngrams(t, range)) ++counts[std::move(g)];
  }
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  if (max_features > 0 && items.size() > max_features) {
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(max_features), items.end(),
                      [](const auto& a, const auto& b) {
                        return a.second != b.second ? a.second > b.second : a.first < b.first;
                      });
    items.resize(max_features);
  }
  std::vector<std::string> terms;
  terms.reserve(items.size());
  for (auto& [g, n] : items) terms.push_back(std::move(g));
  return Vocabulary(std::move(terms));
}

FeatureBlock chargram_features(const std::vector<std::string>& texts, const Vocabulary& vocab,
                               CharGramRange range) {
  check_range(range);
  FeatureBlock block;
  block.name = "chargrams";
  block.matrix = Matrix::Zero(static_cast<Eigen::Index>(texts.size()),
                              static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (const auto& g : char_ngrams(texts[i], range)) {
      if (auto j = vocab.find(g)) block.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j)) += 1.0;
    }
  }
  block.ordering = {"chargrams:" + std::to_string(vocab.size())};
  return block;
}

// ------------------------------------------------------------------- structural

std::size_t StructuralLayout::dims() const {
  std::size_t d = 0;
  for (const auto& [name, w] : groups) d += w;
  return d;
}

std::size_t StructuralLayout::offset(std::string_view group) const {
  std::size_t at = 0;
  for (const auto& [name, w] : groups) {
    if (name == group) return at;
    at += w;
  }
  throw Error("structural layout has no group '" + std::string(group) + "'");
}

std::size_t StructuralLayout::width(std::string_view group) const {
  for (const auto& [name, w] : groups) {
    if (name == group) return w;
  }
  throw Error("structural layout has no group '" + std::string(group) + "'");
}

namespace {

std::string community_group(Relation r) { return "network_" + std::string(to_string(r)) + "_community"; }

}  // namespace

StructuralLayout structural_layout(const CommunityMap& communities) {
  StructuralLayout layout;
  layout.groups = {{"puntuactionmarks", 1}, {"hashtags", 1}, {"length", 1}};
  for (auto r : kStructuralRelationOrder) {
    auto it = communities.find(r);
    const std::size_t width = it == communities.end() ? 0 : static_cast<std::size_t>(it->second.count);
    layout.groups.emplace_back(community_group(r), width);
  }
  layout.groups.emplace_back("userinfobio", 2);
  layout.groups.emplace_back("tweetinfocreateat", 24);
  return layout;
}

int punctuation_count(std::string_view text) {
  int n = 0;
  for (const auto& tok : preprocess(text, PreprocessMode::TwitaClean)) {
    if (is_punctuation_mark(tok)) ++n;
  }
  return n;
}

namespace {

int prefixed_count(std::string_view text, char prefix) {
  int n = 0;
  for (const auto& tok : preprocess(text, PreprocessMode::TwitaClean)) {
    if (tok.size() > 1 && tok[0] == prefix) ++n;
  }
  return n;
}

}  // namespace

int hashtag_count(std::string_view text) { return prefixed_count(text, '#'); }
int mention_count(std::string_view text) { return prefixed_count(text, '@'); }

Vector structural_features(const Tweet& tweet, const CommunityMap& communities) {
  const auto layout = structural_layout(communities);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dims()));
  v[0] = punctuation_count(tweet.text);
  v[1] = hashtag_count(tweet.text);
  v[2] = static_cast<double>(tweet.tokens.size());
  for (auto r : kStructuralRelationOrder) {
    auto it = communities.find(r);
    if (it == communities.end()) continue;
    if (auto c = it->second.find(tweet.author_id)) {
      v[static_cast<Eigen::Index>(layout.offset(community_group(r)) + static_cast<std::size_t>(*c))] = 1.0;
    }
  }
  const auto bio_at = static_cast<Eigen::Index>(layout.offset("userinfobio"));
  if (tweet.bio) {
    v[bio_at] = 1.0;
    v[bio_at + 1] = static_cast<double>(preprocess(*tweet.bio, PreprocessMode::None).size());
  }
  if (auto h = tweet.hour()) {
    v[static_cast<Eigen::Index>(layout.offset("tweetinfocreateat")) + *h] = 1.0;
  }
  return v;
}

// ------------------------------------------------------------ FrequencyExtractor

bool is_frequency_feature(std::string_view name) {
  return std::find(kFrequencyFeatureNames.begin(), kFrequencyFeatureNames.end(), name) !=
         kFrequencyFeatureNames.end();
}

namespace {

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

std::vector<std::string> chargram_texts(const Corpus& c) {
  std::vector<std::string> out;
  out.reserve(c.size());
  for (const auto& t : c.tweets()) out.push_back(join_tokens(t.tokens));
  return out;
}

}  // namespace

FrequencyExtractor::FrequencyExtractor(std::vector<std::string> features, FrequencyOptions options)
    : features_(std::move(features)), options_(options) {
  if (features_.empty()) throw Error("frequency extractor needs at least one feature");
  for (const auto& f : features_) {
    if (!is_frequency_feature(f)) {
      std::string valid;
      for (auto n : kFrequencyFeatureNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
      throw Error("unknown frequency feature '" + f + "' (valid: " + valid + ")");
    }
  }
}

void FrequencyExtractor::fit(const Corpus& train, const CommunityMap& communities) {
  if (train.empty()) throw Error("frequency extractor: empty training corpus");
  const auto has = [&](std::string_view n) {
    return std::find(features_.begin(), features_.end(), n) != features_.end();
  };
  const auto docs = train.token_lists();
  if (has("unigram") || has("Tfidf_unigram")) {
    unigram_vocab_ = Vocabulary::build(docs, options_.unigram_min_count);
    unigram_idf_ = fit_idf(unigram_features(docs, unigram_vocab_).matrix);
  }
  if (has("chargrams") || has("Tfidf_chargrams")) {
    const auto texts = chargram_texts(train);
    chargram_vocab_ = fit_chargram_vocabulary(texts, options_.chargram_range, options_.chargram_max_features);
    chargram_idf_ = fit_idf(chargram_features(texts, chargram_vocab_, options_.chargram_range).matrix);
  }
  communities_ = communities;
  layout_ = structural_layout(communities_);
  fitted_ = true;
}

FeatureBlock FrequencyExtractor::transform(const Corpus& corpus) const {
  if (!fitted_) throw Error("frequency extractor used before fit()");
  const auto n = static_cast<Eigen::Index>(corpus.size());
  const auto docs = corpus.token_lists();

  Matrix structural;
  const auto need_structural = std::any_of(features_.begin(), features_.end(), [](const std::string& f) {
    return f != "unigram" && f != "Tfidf_unigram" && f != "chargrams" && f != "Tfidf_chargrams" &&
           f != "mentions";
  });
  if (need_structural) {
    structural.resize(n, static_cast<Eigen::Index>(layout_.dims()));
    for (Eigen::Index i = 0; i < n; ++i) {
      structural.row(i) = structural_features(corpus[static_cast<std::size_t>(i)], communities_).transpose();
    }
  }
  FeatureBlock chargram_counts;
  if (std::find_if(features_.begin(), features_.end(), [](const std::string& f) {
        return f == "chargrams" || f == "Tfidf_chargrams";
      }) != features_.end()) {
    chargram_counts = chargram_features(chargram_texts(corpus), chargram_vocab_, options_.chargram_range);
  }

  std::vector<FeatureBlock> parts;
  for (const auto& f : features_) {
    FeatureBlock b;
    if (f == "unigram") {
      b = unigram_features(docs, unigram_vocab_);
    } else if (f == "Tfidf_unigram") {
      b = apply_idf(unigram_features(docs, unigram_vocab_), unigram_idf_, f);
    } else if (f == "chargrams") {
      b = chargram_counts;
    } else if (f == "Tfidf_chargrams") {
      b = apply_idf(chargram_counts, chargram_idf_, f);
    } else if (f == "mentions") {
      b.matrix.resize(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) b.matrix(i, 0) = mention_count(corpus[static_cast<std::size_t>(i)].text);
    } else {
      b.matrix = structural.middleCols(static_cast<Eigen::Index>(layout_.offset(f)),
                                       static_cast<Eigen::Index>(layout_.width(f)));
    }
    b.name = f;
    parts.push_back(std::move(b));
  }
  auto out = hconcat(parts, "freq");
  out.check_finite();
  return out;
}

}  // namespace stancelab
