#include "stancelab/embedfeat.hpp"

#include "stancelab/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stancelab {

// ------------------------------------------------------------------- sources

std::string_view to_string(EmbeddingSource s) {
  switch (s) {
    case EmbeddingSource::GloveItWiki: return "glove_itwiki";
    case EmbeddingSource::FastTextIt: return "fasttext_it";
    case EmbeddingSource::Twita100: return "twita100";
    case EmbeddingSource::Twita300: return "twita300";
    case EmbeddingSource::BertMulti: return "bert_multi";
    case EmbeddingSource::Custom: return "custom";
  }
  return "custom";
}

std::optional<EmbeddingSource> parse_embedding_source(std::string_view s) {
  for (auto src : {EmbeddingSource::GloveItWiki, EmbeddingSource::FastTextIt, EmbeddingSource::Twita100,
                   EmbeddingSource::Twita300, EmbeddingSource::BertMulti, EmbeddingSource::Custom}) {
    if (to_string(src) == s) return src;
  }
  return std::nullopt;
}

std::optional<std::size_t> nominal_dim(EmbeddingSource s) {
  switch (s) {
    case EmbeddingSource::GloveItWiki: return 300;
    case EmbeddingSource::FastTextIt: return 300;
    case EmbeddingSource::Twita100: return 100;
    case EmbeddingSource::Twita300: return 300;
    case EmbeddingSource::BertMulti: return 768;
    case EmbeddingSource::Custom: return std::nullopt;
  }
  return std::nullopt;
}

// -------------------------------------------------------------------- table

EmbeddingTable::EmbeddingTable(EmbeddingSource source, std::vector<std::string> words, Matrix vectors)
    : source_(source), words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows()) {
    throw Error("embedding table: word count does not match vector rows");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw Error("embedding table: duplicate word '" + words_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? std::nullopt : std::optional(it->second);
}

namespace {

bool parse_double(std::string_view s, double& out) {
  // std::from_chars for double is available in libstdc++ 11.
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::optional<std::size_t> expected_dim,
                               EmbeddingSource source, EmbeddingLoadDiagnostics* diagnostics) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("embedding file is empty: " + path.string());
  const auto header = split_spaces(line);
  std::size_t count = 0, dim = 0;
  if (header.size() != 2 || std::from_chars(header[0].data(), header[0].data() + header[0].size(), count).ec != std::errc{} ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc{} || dim == 0) {
    throw Error(path.string() + ":1: expected header \"<count> <dim>\"");
  }
  if (expected_dim && *expected_dim != dim) {
    throw Error(path.string() + ": embedding dim " + std::to_string(dim) + " does not match expected " +
                std::to_string(*expected_dim));
  }

  std::vector<std::string> words;
  std::vector<double> values;
  words.reserve(count);
  values.reserve(count * dim);
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto parts = split_spaces(line);
    if (parts.empty()) continue;
    if (parts.size() != dim + 1) {
      throw Error(path.string() + ": line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                  " values, got " + std::to_string(parts.size() - 1));
    }
    std::string word(parts[0]);
    if (seen.contains(word)) {
      if (diagnostics) {
        diagnostics->warnings.push_back(path.string() + ": line " + std::to_string(lineno) + ": duplicate word '" + word +
                                        "' ignored (first on line " + std::to_string(seen[word]) + ")");
      }
      continue;
    }
    seen.emplace(word, lineno);
    for (std::size_t j = 1; j <= dim; ++j) {
      double v = 0;
      if (!parse_double(parts[j], v) || !std::isfinite(v)) {
        throw Error(path.string() + ": line " + std::to_string(lineno) + ": bad value '" + std::string(parts[j]) + "'");
      }
      values.push_back(v);
    }
    words.push_back(std::move(word));
  }
  Matrix vectors = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(words.size()),
                                      static_cast<Eigen::Index>(dim));
  return EmbeddingTable(source, std::move(words), std::move(vectors));
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embeddings: " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  out.precision(9);
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    for (std::size_t j = 0; j < table.dim(); ++j) out << ' ' << table.vectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out << '\n';
  }
}

// ----------------------------------------------------------------- sequences

std::size_t SequenceMatrix::active() const {
  std::size_t n = 0;
  for (bool m : mask) n += m;
  return n;
}

SequenceMatrix embed_sequence(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              std::size_t max_len) {
  if (max_len == 0) throw Error("embed_sequence: max_len must be >= 1");
  SequenceMatrix seq;
  seq.rows = Matrix::Zero(static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(table.dim()));
  seq.mask.assign(max_len, false);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t t = 0; t < n; ++t) {
    seq.mask[t] = true;
    if (auto i = table.find(tokens[t])) seq.rows.row(static_cast<Eigen::Index>(t)) = table.row(*i);
  }
  return seq;
}

// ---------------------------------------------------------------- similarity

SimilarityTable::SimilarityTable(std::shared_ptr<const EmbeddingTable> base,
                                 const std::vector<std::string>& anchor_vocab, std::vector<std::string>* dropped)
    : base_(std::move(base)) {
  if (!base_) throw Error("similarity table: null base table");
  std::vector<std::size_t> rows;
  for (const auto& w : anchor_vocab) {
    if (auto i = base_->find(w)) {
      anchors_.push_back(w);
      rows.push_back(*i);
    } else if (dropped) {
      dropped->push_back(w);
    }
  }
  if (anchors_.empty()) throw Error("similarity table: empty anchor vocabulary");
  unit_anchors_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(base_->dim()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    Vector v = base_->row(rows[a]).transpose();
    const double norm = v.norm();
    unit_anchors_.row(static_cast<Eigen::Index>(a)) = norm > 0 ? Vector(v / norm).transpose() : v.transpose();
  }
}

std::optional<Vector> SimilarityTable::vector(std::string_view word) const {
  auto i = base_->find(word);
  if (!i) return std::nullopt;
  Vector v = base_->row(*i).transpose();
  const double norm = v.norm();
  if (norm == 0.0) return Vector::Zero(static_cast<Eigen::Index>(anchors_.size()));
  Vector sv = unit_anchors_ * (v / norm);
  return sv.cwiseMax(-1.0).cwiseMin(1.0);
}

Matrix SimilarityTable::rows(const std::vector<std::string>& words) const {
  Matrix unit = Matrix::Zero(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(base_->dim()));
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (auto i = base_->find(words[w])) {
      const double norm = base_->row(*i).norm();
      if (norm > 0) unit.row(static_cast<Eigen::Index>(w)) = base_->row(*i) / norm;
    }
  }
  Matrix out = unit * unit_anchors_.transpose();
  return out.cwiseMax(-1.0).cwiseMin(1.0);
}

void SimilarityTable::save(const std::filesystem::path& path, const std::vector<std::string>& words) const {
  std::vector<std::string> present;
  for (const auto& w : words) {
    if (base_->contains(w)) present.push_back(w);
  }
  save_embeddings(EmbeddingTable(EmbeddingSource::Custom, present, rows(present)), path);
  std::ofstream side(path.string() + ".anchors");
  if (!side) throw Error("cannot write anchor sidecar for " + path.string());
  for (const auto& a : anchors_) side << a << '\n';
}

SimilarityTable build_similarity_table(std::shared_ptr<const EmbeddingTable> table,
                                       const std::vector<std::string>& anchor_vocab,
                                       std::vector<std::string>* dropped) {
  return SimilarityTable(std::move(table), anchor_vocab, dropped);
}

EmbeddingTable sv_embedding_table(const SimilarityTable& sim, const std::vector<std::string>& words,
                                  const PcaModel* pca) {
  std::vector<std::string> present;
  present.reserve(words.size());
  for (const auto& w : words) {
    if (sim.vector(w)) present.push_back(w);
  }
  Matrix rows = sim.rows(present);
  if (pca) rows = pca_transform(*pca, rows);
  return EmbeddingTable(EmbeddingSource::Custom, std::move(present), std::move(rows));
}

SequenceMatrix sv_sequence(const std::vector<std::string>& tokens, const SimilarityTable& sim, const PcaModel* pca,
                           std::size_t max_len) {
  if (max_len == 0) throw Error("sv_sequence: max_len must be >= 1");
  if (pca && pca->input_dim() != sim.dim()) {
    throw Error("sv_sequence: PCA expects " + std::to_string(pca->input_dim()) + " inputs but SVs have " +
                std::to_string(sim.dim()));
  }
  const std::size_t width = pca ? pca->output_dim() : sim.dim();
  SequenceMatrix seq;
  seq.rows = Matrix::Zero(static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(width));
  seq.mask.assign(max_len, false);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t t = 0; t < n; ++t) {
    seq.mask[t] = true;
    if (auto sv = sim.vector(tokens[t])) {
      seq.rows.row(static_cast<Eigen::Index>(t)) = pca ? Vector(pca_transform_row(*pca, *sv)).transpose() : sv->transpose();
    }
  }
  return seq;
}

PcaModel fit_sv_pca(const SimilarityTable& sim, const std::vector<std::string>& train_vocab, std::size_t k) {
  std::vector<std::string> present;
  for (const auto& w : train_vocab) {
    if (sim.vector(w)) present.push_back(w);
  }
  if (present.empty()) throw Error("fit_sv_pca: no training word is present in the base table");
  return pca_fit(sim.rows(present), k);
}

}  // namespace stancelab
