#pragma once

#include "stancelab/feature_block.hpp"
#include "stancelab/pca.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stancelab {

enum class EmbeddingSource { GloveItWiki, FastTextIt, Twita100, Twita300, BertMulti, Custom };

std::string_view to_string(EmbeddingSource s);            // file stem, e.g. "fasttext_it"
std::optional<EmbeddingSource> parse_embedding_source(std::string_view s);
// Dimension the named public sources ship with; nullopt for Custom.
std::optional<std::size_t> nominal_dim(EmbeddingSource s);

// word -> row of `vectors`. All rows share dim.
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  EmbeddingTable(EmbeddingSource source, std::vector<std::string> words, Matrix vectors);

  EmbeddingSource source() const { return source_; }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const Matrix& vectors() const { return vectors_; }

  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  // Row view; caller checks presence first.
  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

private:
  EmbeddingSource source_ = EmbeddingSource::Custom;
  std::vector<std::string> words_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct EmbeddingLoadDiagnostics {
  std::vector<std::string> warnings;  // duplicate words (first kept)
};

// word2vec text format: "count dim" header, then "word v1 ... vdim".
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = std::nullopt,
                               EmbeddingSource source = EmbeddingSource::Custom,
                               EmbeddingLoadDiagnostics* diagnostics = nullptr);
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// L x d rows plus a length-L mask (true = real token, false = padding).
struct SequenceMatrix {
  Matrix rows;
  std::vector<bool> mask;

  std::size_t length() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
  std::size_t active() const;
};

inline constexpr std::size_t kDefaultMaxLen = 64;

// OOV tokens become zero rows (still unmasked); truncate/right-pad to max_len.
SequenceMatrix embed_sequence(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              std::size_t max_len = kDefaultMaxLen);

// SV(w)[i] = cos(emb(w), emb(anchor_i)); a zero vector w yields a zero SV.
class SimilarityTable {
public:
  SimilarityTable() = default;
  // Anchors absent from `base` are dropped and reported through `dropped`.
  SimilarityTable(std::shared_ptr<const EmbeddingTable> base, const std::vector<std::string>& anchor_vocab,
                  std::vector<std::string>* dropped = nullptr);

  const std::vector<std::string>& anchors() const { return anchors_; }
  std::size_t dim() const { return anchors_.size(); }

  // nullopt when the word is OOV in the base table.
  std::optional<Vector> vector(std::string_view word) const;
  // Dense SV rows for the given words (OOV -> zero rows).
  Matrix rows(const std::vector<std::string>& words) const;

  // Cache: word2vec-format table of SVs plus "<path>.anchors" (one anchor per line).
  void save(const std::filesystem::path& path, const std::vector<std::string>& words) const;

private:
  std::shared_ptr<const EmbeddingTable> base_;
  std::vector<std::string> anchors_;
  Matrix unit_anchors_;  // |anchors| x d, each row L2-normalised
};

SimilarityTable build_similarity_table(std::shared_ptr<const EmbeddingTable> table, const std::vector<std::string>& anchor_vocab,
                                       std::vector<std::string>* dropped = nullptr);

// Per-token SV rows, optionally PCA-reduced, assembled like embed_sequence.
SequenceMatrix sv_sequence(const std::vector<std::string>& tokens, const SimilarityTable& sim,
                           const PcaModel* pca, std::size_t max_len = kDefaultMaxLen);

// Materialises (optionally reduced) SV rows for `words` as an embedding table,
// so sequences can be assembled with embed_sequence. Words OOV in the base
// table are omitted and therefore embed as zero rows.
EmbeddingTable sv_embedding_table(const SimilarityTable& sim, const std::vector<std::string>& words,
                                  const PcaModel* pca);

// PCA over the SV rows of the training vocabulary (one row per in-table word).
PcaModel fit_sv_pca(const SimilarityTable& sim, const std::vector<std::string>& train_vocab, std::size_t k);

}  // namespace stancelab
