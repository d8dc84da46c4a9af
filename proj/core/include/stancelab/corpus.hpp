#pragma once

#include "stancelab/label.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stancelab {

struct Tweet {
  std::string id;
  std::string author_id;
  std::string text;
  std::string created_at;                 // raw field as read
  std::optional<std::int64_t> timestamp;  // seconds since epoch, UTC
  std::optional<std::string> bio;
  std::optional<StanceLabel> label;
  std::vector<std::string> tokens;        // filled by tokenize()

  // 0..23 when the timestamp parsed.
  std::optional<int> hour() const;
};

// Immutable once loaded; ids are unique.
class Corpus {
public:
  Corpus() = default;
  explicit Corpus(std::vector<Tweet> tweets);

  std::size_t size() const { return tweets_.size(); }
  bool empty() const { return tweets_.empty(); }
  const std::vector<Tweet>& tweets() const { return tweets_; }
  const Tweet& operator[](std::size_t i) const { return tweets_[i]; }
  const Tweet* find(std::string_view id) const;

  std::vector<std::vector<std::string>> token_lists() const;
  std::vector<std::string> texts() const;
  std::vector<StanceLabel> labels() const;  // throws if any instance is unlabeled

  // Disjoint union in the order (*this, other); throws on id collision.
  Corpus merged_with(const Corpus& other) const;

private:
  std::vector<Tweet> tweets_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { Csv, Jsonl };

struct LoadDiagnostics {
  std::vector<std::string> malformed;  // "line N: reason"; those rows are skipped
};

// Required columns: id, author_id, text, label (label may be empty for test
// data). created_at and bio are optional columns. Throws on a missing file, a
// missing column, a duplicate id, or when no valid row remains.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   LoadDiagnostics* diagnostics = nullptr);

// Picks the format from the extension (.csv / .jsonl / .json).
Corpus load_corpus(const std::filesystem::path& path, LoadDiagnostics* diagnostics = nullptr);

void save_corpus_csv(const Corpus& corpus, const std::filesystem::path& path);

// Accepts "YYYY-MM-DD[ T]HH:MM[:SS][Z]", the classic Twitter
// "Wed Nov 20 10:15:00 +0000 2019" form, or integer epoch seconds.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

enum class PreprocessMode { None, TwitaClean };

std::string_view to_string(PreprocessMode mode);
PreprocessMode parse_preprocess_mode(std::string_view text);

// None: whitespace split. TwitaClean: lowercase, URLs -> "URL", @mentions and
// #hashtags kept whole, punctuation marks split into their own tokens.
std::vector<std::string> preprocess(std::string_view text, PreprocessMode mode);

// True for a single ASCII punctuation character or one of the common
// typographic marks (ellipsis, curly quotes, guillemets, dashes).
bool is_punctuation_mark(std::string_view token);

// Copy of the corpus with Tweet::tokens filled.
Corpus tokenize(const Corpus& corpus, PreprocessMode mode);

struct SplitSpec {
  double train_ratio = 0.8;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Corpus train;
  Corpus eval;
};

// |train| = floor(N * ratio). Each class gets floor(count * ratio); the
// leftover slots go to the classes with the largest fractional parts
// (ties: larger class, then label name). Members are chosen by a seeded shuffle.
SplitResult stratified_split(const Corpus& corpus, const SplitSpec& spec);

}  // namespace stancelab
