#include "stancelab/corpus.hpp"

#include "stancelab/csv.hpp"
#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace stancelab {

// ---------------------------------------------------------------- Tweet/Corpus

std::optional<int> Tweet::hour() const {
  if (!timestamp) return std::nullopt;
  std::int64_t secs = *timestamp % 86400;
  if (secs < 0) secs += 86400;
  return static_cast<int>(secs / 3600);
}

Corpus::Corpus(std::vector<Tweet> tweets) : tweets_(std::move(tweets)) {
  index_.reserve(tweets_.size());
  for (std::size_t i = 0; i < tweets_.size(); ++i) {
    if (!index_.emplace(tweets_[i].id, i).second) {
      throw Error("duplicate tweet id '" + tweets_[i].id + "'");
    }
  }
}

const Tweet* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &tweets_[it->second];
}

std::vector<std::vector<std::string>> Corpus::token_lists() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(tweets_.size());
  for (const auto& t : tweets_) out.push_back(t.tokens);
  return out;
}

std::vector<std::string> Corpus::texts() const {
  std::vector<std::string> out;
  out.reserve(tweets_.size());
  for (const auto& t : tweets_) out.push_back(t.text);
  return out;
}

std::vector<StanceLabel> Corpus::labels() const {
  std::vector<StanceLabel> out;
  out.reserve(tweets_.size());
  for (const auto& t : tweets_) {
    if (!t.label) throw Error("tweet '" + t.id + "' has no label");
    out.push_back(*t.label);
  }
  return out;
}

Corpus Corpus::merged_with(const Corpus& other) const {
  std::vector<Tweet> all = tweets_;
  all.insert(all.end(), other.tweets_.begin(), other.tweets_.end());
  return Corpus(std::move(all));
}

// ------------------------------------------------------------------ timestamps

namespace {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::optional<std::int64_t> to_epoch(int y, int mo, int d, int h, int mi, int s) {
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
      s < 0 || s > 60) {
    return std::nullopt;
  }
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + s;
}

std::optional<std::int64_t> parse_clock(int y, int mo, int d, std::string_view clock) {
  // HH:MM[:SS]
  int h = 0, mi = 0, s = 0;
  if (clock.size() < 5 || clock[2] != ':') return std::nullopt;
  if (!parse_int(clock.substr(0, 2), h) || !parse_int(clock.substr(3, 2), mi)) return std::nullopt;
  if (clock.size() >= 8) {
    if (clock[5] != ':' || !parse_int(clock.substr(6, 2), s)) return std::nullopt;
  }
  return to_epoch(y, mo, d, h, mi, s);
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  if (std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{}) return v;
    return std::nullopt;
  }

  // ISO-8601
  if (text.size() >= 16 && text[4] == '-' && text[7] == '-' && (text[10] == 'T' || text[10] == ' ')) {
    int y = 0, mo = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
        !parse_int(text.substr(8, 2), d)) {
      return std::nullopt;
    }
    return parse_clock(y, mo, d, text.substr(11, std::min<std::size_t>(8, text.size() - 11)));
  }

  // "Wed Nov 20 10:15:00 +0000 2019"
  static constexpr std::array<std::string_view, 12> kMonths{
      "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto next = text.find(' ', pos);
    const auto part = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
    if (!part.empty()) parts.push_back(part);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (parts.size() == 6) {
    const auto m = std::find(kMonths.begin(), kMonths.end(), parts[1]);
    int d = 0, y = 0;
    if (m != kMonths.end() && parse_int(parts[2], d) && parse_int(parts[5], y)) {
      return parse_clock(y, static_cast<int>(m - kMonths.begin()) + 1, d, parts[3]);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------- loading

namespace {

constexpr std::array<std::string_view, 4> kRequiredColumns{"id", "author_id", "text", "label"};

struct RowFields {
  std::string id, author_id, text, created_at, bio, label;
  bool has_bio = false;
};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Returns an error reason, or empty on success.
std::string make_tweet(const RowFields& row, Tweet& out) {
  if (row.id.empty()) return "empty id";
  if (row.author_id.empty()) return "empty author_id";
  if (is_blank(row.text)) return "empty text";
  out.id = row.id;
  out.author_id = row.author_id;
  out.text = row.text;
  out.created_at = row.created_at;
  out.timestamp = parse_timestamp(row.created_at);
  if (!row.created_at.empty() && !out.timestamp) return "unparseable created_at '" + row.created_at + "'";
  if (row.has_bio && !row.bio.empty()) out.bio = row.bio;
  if (!row.label.empty()) {
    out.label = parse_label(row.label);
    if (!out.label) return "unknown label '" + row.label + "'";
  }
  return {};
}

void add_row(std::vector<Tweet>& tweets, std::map<std::string, std::size_t>& seen,
             const RowFields& row, std::size_t line, LoadDiagnostics& diag) {
  Tweet t;
  const std::string reason = make_tweet(row, t);
  if (!reason.empty()) {
    diag.malformed.push_back("line " + std::to_string(line) + ": " + reason);
    return;
  }
  auto [it, inserted] = seen.emplace(t.id, line);
  if (!inserted) {
    throw Error("duplicate id '" + t.id + "' on line " + std::to_string(line) +
                " (first seen on line " + std::to_string(it->second) + ")");
  }
  tweets.push_back(std::move(t));
}

std::vector<Tweet> load_csv(const std::filesystem::path& path, LoadDiagnostics& diag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path.string());
  csv::Reader reader(in);
  csv::Record header;
  if (!reader.next(header)) throw Error("empty corpus: " + path.string());
  if (!header.fields.empty() && header.fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header.fields[0].erase(0, 3);
  }
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.fields.size(); ++i) col[header.fields[i]] = i;
  for (auto name : kRequiredColumns) {
    if (!col.contains(name)) {
      throw Error("corpus " + path.string() + ": missing required column '" + std::string(name) + "'");
    }
  }
  const auto optional_col = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = col.find(name);
    return it == col.end() ? std::nullopt : std::optional(it->second);
  };
  const auto created_col = optional_col("created_at");
  const auto bio_col = optional_col("bio");

  std::vector<Tweet> tweets;
  std::map<std::string, std::size_t> seen;
  csv::Record rec;
  while (reader.next(rec)) {
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
    if (rec.fields.size() != header.fields.size()) {
      diag.malformed.push_back("line " + std::to_string(rec.line) + ": expected " +
                               std::to_string(header.fields.size()) + " fields, got " +
                               std::to_string(rec.fields.size()));
      continue;
    }
    RowFields row;
    row.id = rec.fields[col["id"]];
    row.author_id = rec.fields[col["author_id"]];
    row.text = rec.fields[col["text"]];
    row.label = rec.fields[col["label"]];
    if (created_col) row.created_at = rec.fields[*created_col];
    if (bio_col) {
      row.bio = rec.fields[*bio_col];
      row.has_bio = true;
    }
    add_row(tweets, seen, row, rec.line, diag);
  }
  return tweets;
}

std::vector<Tweet> load_jsonl(const std::filesystem::path& path, LoadDiagnostics& diag) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path.string());
  std::vector<Tweet> tweets;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      diag.malformed.push_back("line " + std::to_string(lineno) + ": invalid JSON");
      continue;
    }
    if (!obj.is_object()) {
      diag.malformed.push_back("line " + std::to_string(lineno) + ": not a JSON object");
      continue;
    }
    for (auto name : kRequiredColumns) {
      if (!obj.contains(std::string(name))) {
        throw Error("corpus " + path.string() + ": line " + std::to_string(lineno) +
                    " is missing required key '" + std::string(name) + "'");
      }
    }
    const auto str = [&](const char* key) -> std::string {
      if (!obj.contains(key) || obj[key].is_null()) return {};
      if (obj[key].is_string()) return obj[key].get<std::string>();
      return obj[key].dump();
    };
    RowFields row;
    row.id = str("id");
    row.author_id = str("author_id");
    row.text = str("text");
    row.label = str("label");
    row.created_at = str("created_at");
    row.has_bio = obj.contains("bio");
    row.bio = str("bio");
    add_row(tweets, seen, row, lineno, diag);
  }
  return tweets;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   LoadDiagnostics* diagnostics) {
  if (!std::filesystem::exists(path)) throw Error("corpus file not found: " + path.string());
  LoadDiagnostics local;
  LoadDiagnostics& diag = diagnostics ? *diagnostics : local;
  auto tweets = format == CorpusFormat::Csv ? load_csv(path, diag) : load_jsonl(path, diag);
  if (tweets.empty()) throw Error("empty corpus: " + path.string());
  return Corpus(std::move(tweets));
}

Corpus load_corpus(const std::filesystem::path& path, LoadDiagnostics* diagnostics) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return load_corpus(path, CorpusFormat::Csv, diagnostics);
  if (ext == ".jsonl" || ext == ".json") return load_corpus(path, CorpusFormat::Jsonl, diagnostics);
  throw Error("cannot infer corpus format from extension: " + path.string());
}

void save_corpus_csv(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus: " + path.string());
  out << "id,author_id,text,created_at,bio,label\n";
  for (const auto& t : corpus.tweets()) {
    out << csv::join({t.id, t.author_id, t.text, t.created_at, t.bio.value_or(""),
                      t.label ? std::string(to_string(*t.label)) : std::string()})
        << '\n';
  }
}

// ------------------------------------------------------------------ preprocess

std::string_view to_string(PreprocessMode mode) {
  return mode == PreprocessMode::None ? "none" : "twita_clean";
}

PreprocessMode parse_preprocess_mode(std::string_view text) {
  if (text == "none") return PreprocessMode::None;
  if (text == "twita_clean") return PreprocessMode::TwitaClean;
  throw Error("unknown preprocessing mode '" + std::string(text) + "' (valid: none, twita_clean)");
}

namespace {

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

// Lowercases ASCII and the Latin-1 supplement block (U+00C0..U+00DE, minus U+00D7).
std::string to_lower_utf8(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = static_cast<unsigned char>(out[i]);
    if (c < 0x80) {
      out[i] = static_cast<char>(std::tolower(c));
    } else if (c == 0xC3 && i + 1 < out.size()) {
      const auto n = static_cast<unsigned char>(out[i + 1]);
      if (n >= 0x80 && n <= 0x9E && n != 0x97) out[i + 1] = static_cast<char>(n + 0x20);
      ++i;
    }
  }
  return out;
}

bool is_url(std::string_view chunk) {
  const std::string lower = to_lower_utf8(chunk.substr(0, 8));
  return lower.rfind("http://", 0) == 0 || lower.rfind("https://", 0) == 0 ||
         lower.rfind("www.", 0) == 0;
}

// Multi-byte punctuation treated like ASCII punctuation.
constexpr std::array<std::string_view, 9> kUnicodePunct{
    "…", "“", "”", "‘", "’", "«", "»", "–", "—"};

// Length of a punctuation mark starting at s[i], or 0.
std::size_t punct_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (auto p : kUnicodePunct) {
    if (s.substr(i, p.size()) == p) return p.size();
  }
  return 0;
}

bool is_word_start(std::string_view s, std::size_t i) {
  return i < s.size() && punct_len(s, i) == 0;
}

void clean_chunk(std::string_view chunk, std::vector<std::string>& out) {
  if (chunk == "URL") {
    out.emplace_back("URL");
    return;
  }
  if (is_url(chunk)) {
    out.emplace_back("URL");
    return;
  }
  const std::string s = to_lower_utf8(chunk);
  std::string word;
  std::size_t i = 0;
  const auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  while (i < s.size()) {
    if ((s[i] == '@' || s[i] == '#') && word.empty() && is_word_start(s, i + 1)) {
      word.push_back(s[i++]);
      while (i < s.size() && (s[i] == '_' || punct_len(s, i) == 0)) word.push_back(s[i++]);
      flush();
      continue;
    }
    const std::size_t p = punct_len(s, i);
    if (p > 0) {
      flush();
      out.emplace_back(s.substr(i, p));
      i += p;
    } else {
      word.push_back(s[i++]);
    }
  }
  flush();
}

}  // namespace

bool is_punctuation_mark(std::string_view token) {
  return !token.empty() && punct_len(token, 0) == token.size();
}

std::vector<std::string> preprocess(std::string_view text, PreprocessMode mode) {
  auto chunks = split_whitespace(text);
  if (mode == PreprocessMode::None) return chunks;
  std::vector<std::string> out;
  out.reserve(chunks.size() + 4);
  for (const auto& c : chunks) clean_chunk(c, out);
  return out;
}

Corpus tokenize(const Corpus& corpus, PreprocessMode mode) {
  std::vector<Tweet> tweets = corpus.tweets();
  for (auto& t : tweets) t.tokens = preprocess(t.text, mode);
  return Corpus(std::move(tweets));
}

// ------------------------------------------------------------------------ split

SplitResult stratified_split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_ratio > 0.0 && spec.train_ratio < 1.0)) {
    throw Error("train_ratio must lie in the open interval (0,1), got " +
                std::to_string(spec.train_ratio));
  }
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i];
    if (!t.label) throw Error("stratified_split: tweet '" + t.id + "' is unlabeled");
    members[index_of(*t.label)].push_back(i);
  }
  for (auto l : kAllLabels) {
    const auto n = members[index_of(l)].size();
    if (n == 1) {
      throw Error("stratified_split: class " + std::string(to_string(l)) +
                  " has a single instance; need at least 2");
    }
  }

  const auto total = static_cast<std::size_t>(std::floor(static_cast<double>(corpus.size()) * spec.train_ratio));
  std::array<std::size_t, kNumClasses> quota{};
  std::array<double, kNumClasses> frac{};
  std::size_t assigned = 0;
  for (auto l : kAllLabels) {
    const int c = index_of(l);
    const double exact = static_cast<double>(members[c].size()) * spec.train_ratio;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    frac[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::array<int, kNumClasses> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    if (members[a].size() != members[b].size()) return members[a].size() > members[b].size();
    return to_string(kAllLabels[a]) < to_string(kAllLabels[b]);
  });
  for (std::size_t k = 0; assigned < total; ++k) {
    const int c = order[k % kNumClasses];
    if (quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  std::vector<char> in_train(corpus.size(), 0);
  for (auto l : kAllLabels) {
    const int c = index_of(l);
    auto idx = members[c];
    Rng rng = derive_rng(spec.seed, static_cast<std::uint64_t>(c) + 1);
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    }
    for (std::size_t k = 0; k < quota[c]; ++k) in_train[idx[k]] = 1;
  }

  std::vector<Tweet> train, eval;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_train[i] ? train : eval).push_back(corpus[i]);
  }
  return {Corpus(std::move(train)), Corpus(std::move(eval))};
}

}  // namespace stancelab
