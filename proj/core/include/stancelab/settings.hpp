#pragma once

#include "stancelab/corpus.hpp"
#include "stancelab/embedfeat.hpp"
#include "stancelab/freqfeat.hpp"
#include "stancelab/fusion.hpp"
#include "stancelab/heads.hpp"
#include "stancelab/skipgram.hpp"
#include "stancelab/walks.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stancelab {

// HEAD(SOURCE), e.g. Conv2D(FastText).
struct EmbedBlockConfig {
  HeadKind head = HeadKind::Cnn2dMulti;
  EmbeddingSource source = EmbeddingSource::FastTextIt;
  bool operator==(const EmbedBlockConfig&) const = default;
};

// HEAD(PCA(SVs)), HEAD(SVs) or bare PCA(SVs) (mean-pooled over tokens).
struct SvBlockConfig {
  std::optional<HeadKind> head = HeadKind::Cnn2dMulti;
  bool pca = true;
  bool operator==(const SvBlockConfig&) const = default;
};

// PCA(f1 + f2 ...), optionally wrapped by a head that reads the reduced
// vector as a length-k sequence of scalars.
struct FreqBlockConfig {
  std::vector<std::string> features;
  std::optional<HeadKind> head;
  bool operator==(const FreqBlockConfig&) const = default;
};

struct RunConfig {
  std::optional<EmbedBlockConfig> embed;
  std::optional<SvBlockConfig> sv;
  std::optional<FreqBlockConfig> freq;
  std::optional<WalkStrategy> graph;

  PreprocessMode preprocess = PreprocessMode::TwitaClean;
  double train_ratio = 0.8;
  std::uint64_t split_seed = 0;
  std::uint64_t seed = 0;  // model, walk and skip-gram seeds derive from this
  std::size_t max_len = kDefaultMaxLen;
  std::size_t sv_pca_k = 100;
  std::size_t freq_pca_k = 100;
  std::optional<std::size_t> embedding_dim;  // expected width of the embedding file
  // Base space for SVs; defaults to the embedding block's source, else FastText.
  std::optional<EmbeddingSource> sv_source;
  bool require_friendship = true;
  bool run_t100 = false;

  HeadConfig head;  // shared head hyperparameters; kind and seed are set per slot
  FusionConfig fusion;
  WalkConfig walks;
  SkipGramConfig skipgram;
  FrequencyOptions frequency;

  bool has_text_block() const { return embed || sv || freq; }
  EmbeddingSource sv_base() const;
  // Throws with an explanation when the configuration cannot run.
  void validate() const;
};

std::string_view source_display_name(EmbeddingSource s);  // FastText, TWITA300, ...
std::optional<EmbeddingSource> parse_source_display_name(std::string_view s);
std::string_view graph_display_name(WalkStrategy s);      // DeepWalk, Node2Vec, Struc2Vec

// Settings string grammar: TERM (" + " TERM)*, where TERM is HEAD(SOURCE),
// HEAD(PCA(SVs)), PCA(SVs), PCA(FEATURE + ...), HEAD(PCA(FEATURE + ...)) or a
// graph name. Parses into `base`, replacing its block selections. Escaped
// underscores ("Tfidf\_unigram") are accepted, and an unclosed HEAD(SOURCE
// directly followed by " + " is closed implicitly.
RunConfig parse_settings(std::string_view text, const RunConfig& base = {});
// Canonical form: blocks in embed, sv, freq, graph order joined by " + ".
std::string format_settings(const RunConfig& cfg);
std::string normalize_settings(std::string_view text);

// Terms for the individual axes, used by the search space.
std::optional<EmbedBlockConfig> parse_embed_term(std::string_view text);
std::optional<SvBlockConfig> parse_sv_term(std::string_view text);
std::optional<FreqBlockConfig> parse_freq_term(std::string_view text);
std::optional<WalkStrategy> parse_graph_term(std::string_view text);
std::string format_term(const EmbedBlockConfig& b);
std::string format_term(const SvBlockConfig& b);
std::string format_term(const FreqBlockConfig& b);

// JSON mirror of RunConfig. "settings" carries the block selection; every
// other key is optional and overrides the default. Unknown keys are errors.
std::string run_config_to_json(const RunConfig& cfg, int indent = 2);
RunConfig run_config_from_json(std::string_view json_text);

// Accepts either a path to a JSON config file or a settings string.
RunConfig load_run_config(std::string_view file_or_settings);

}  // namespace stancelab
