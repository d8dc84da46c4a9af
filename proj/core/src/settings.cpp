#include "stancelab/settings.hpp"

#include "json_io.hpp"
#include "stancelab/error.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

namespace stancelab {

namespace {

constexpr std::array<HeadKind, 4> kHeads{HeadKind::Cnn2dMulti, HeadKind::Cnn1d, HeadKind::BiLstm,
                                         HeadKind::AttBiLstm};
constexpr std::array<EmbeddingSource, 6> kSources{EmbeddingSource::FastTextIt, EmbeddingSource::Twita300,
                                                  EmbeddingSource::Twita100,   EmbeddingSource::GloveItWiki,
                                                  EmbeddingSource::BertMulti,  EmbeddingSource::Custom};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

template <class Range, class F>
std::string list_names(const Range& r, F name) {
  std::string out;
  for (const auto& x : r) out += (out.empty() ? "" : ", ") + std::string(name(x));
  return out;
}

std::string valid_heads() { return list_names(kHeads, [](HeadKind k) { return to_string(k); }); }
std::string valid_sources() { return list_names(kSources, source_display_name); }

std::optional<HeadKind> head_named(std::string_view s) {
  for (auto k : kHeads) {
    if (iequals(to_string(k), s)) return k;
  }
  return std::nullopt;
}

// "NAME(inner)" -> {NAME, inner}; the outer parentheses must enclose the rest.
std::optional<std::pair<std::string, std::string>> split_call(std::string_view term) {
  const auto open = term.find('(');
  if (open == std::string_view::npos || term.back() != ')') return std::nullopt;
  int depth = 0;
  for (std::size_t i = open; i < term.size(); ++i) {
    if (term[i] == '(') ++depth;
    if (term[i] == ')' && --depth == 0 && i + 1 != term.size()) return std::nullopt;
  }
  if (depth != 0) return std::nullopt;
  return std::pair{std::string(term.substr(0, open)), std::string(term.substr(open + 1, term.size() - open - 2))};
}

std::vector<std::string> split_top_level(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) throw Error("settings: unbalanced ')' in \"" + std::string(text) + "\"");
    if (c == '+' && depth == 0) {
      out.push_back(strip_spaces(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw Error("settings: unbalanced '(' in \"" + std::string(text) + "\"");
  out.push_back(strip_spaces(cur));
  for (const auto& t : out) {
    if (t.empty()) throw Error("settings: empty term in \"" + std::string(text) + "\"");
  }
  return out;
}

std::vector<std::string> parse_feature_list(std::string_view inner) {
  std::vector<std::string> out;
  for (const auto& raw : split_top_level(inner)) {
    auto it = std::find_if(kFrequencyFeatureNames.begin(), kFrequencyFeatureNames.end(),
                           [&](std::string_view n) { return iequals(n, raw); });
    if (it == kFrequencyFeatureNames.end()) {
      throw Error("settings: unknown frequency feature \"" + raw + "\" (valid: " +
                  list_names(kFrequencyFeatureNames, [](std::string_view n) { return n; }) + ")");
    }
    if (std::find(out.begin(), out.end(), *it) != out.end()) {
      throw Error("settings: frequency feature \"" + std::string(*it) + "\" listed twice");
    }
    out.emplace_back(*it);
  }
  return out;
}

bool is_svs(std::string_view s) { return iequals(s, "SVs"); }

// Block parsed from one term.
struct Term {
  std::optional<EmbedBlockConfig> embed;
  std::optional<SvBlockConfig> sv;
  std::optional<FreqBlockConfig> freq;
  std::optional<WalkStrategy> graph;
};

Term parse_term(const std::string& term) {
  Term t;
  if (auto g = parse_graph_term(term)) {
    t.graph = g;
    return t;
  }
  if (is_svs(term)) {
    t.sv = SvBlockConfig{std::nullopt, false};
    return t;
  }
  auto call = split_call(term);
  if (!call) {
    throw Error("settings: cannot parse term \"" + term + "\"; expected HEAD(SOURCE), PCA(...), or a graph name "
                "(DeepWalk, Node2Vec, Struc2Vec)");
  }
  const auto& [name, inner] = *call;
  if (iequals(name, "PCA")) {
    if (is_svs(inner)) t.sv = SvBlockConfig{std::nullopt, true};
    else t.freq = FreqBlockConfig{parse_feature_list(inner), std::nullopt};
    return t;
  }
  auto head = head_named(name);
  if (!head) throw Error("settings: unknown head \"" + name + "\" (valid: " + valid_heads() + ")");
  if (is_svs(inner)) {
    t.sv = SvBlockConfig{head, false};
    return t;
  }
  if (auto in = split_call(inner); in && iequals(in->first, "PCA")) {
    if (is_svs(in->second)) t.sv = SvBlockConfig{head, true};
    else t.freq = FreqBlockConfig{parse_feature_list(in->second), head};
    return t;
  }
  auto source = parse_source_display_name(inner);
  if (!source) {
    throw Error("settings: unknown embedding source \"" + inner + "\" (valid: " + valid_sources() +
                ", or PCA(SVs) / SVs)");
  }
  t.embed = EmbedBlockConfig{*head, *source};
  return t;
}

std::string clean_text(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != '\\') s += c;
  }
  // HEAD(SOURCE followed by "+" with the ")" missing.
  static const std::regex unclosed(R"(((?:Conv1D|Conv2D|BiLSTM|AttLSTM)\s*\(\s*)([A-Za-z0-9_]+)(\s*\+))",
                                   std::regex::icase);
  std::string out;
  auto begin = std::sregex_iterator(s.begin(), s.end(), unclosed);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string word = m[2].str();
    out += s.substr(last, static_cast<std::size_t>(m.position(0)) - last);
    if (iequals(word, "PCA") || is_svs(word)) out += m.str(0);
    else out += m[1].str() + word + ")" + m[3].str();
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out += s.substr(last);
  return out;
}

template <class T>
void set_once(std::optional<T>& slot, const std::optional<T>& value, std::string_view what, const std::string& term) {
  if (!value) return;
  if (slot) throw Error("settings: second " + std::string(what) + " block \"" + term + "\"");
  slot = value;
}

}  // namespace

std::string_view source_display_name(EmbeddingSource s) {
  switch (s) {
    case EmbeddingSource::FastTextIt: return "FastText";
    case EmbeddingSource::Twita300: return "TWITA300";
    case EmbeddingSource::Twita100: return "TWITA100";
    case EmbeddingSource::GloveItWiki: return "GloVe";
    case EmbeddingSource::BertMulti: return "BERT";
    case EmbeddingSource::Custom: return "Custom";
  }
  return "Custom";
}

std::optional<EmbeddingSource> parse_source_display_name(std::string_view s) {
  for (auto src : kSources) {
    if (iequals(source_display_name(src), s) || iequals(to_string(src), s)) return src;
  }
  return std::nullopt;
}

std::string_view graph_display_name(WalkStrategy s) {
  switch (s) {
    case WalkStrategy::DeepWalk: return "DeepWalk";
    case WalkStrategy::Node2Vec: return "Node2Vec";
    case WalkStrategy::Struc2Vec: return "Struc2Vec";
  }
  return "DeepWalk";
}

std::optional<WalkStrategy> parse_graph_term(std::string_view text) {
  const auto s = strip_spaces(text);
  for (auto w : {WalkStrategy::DeepWalk, WalkStrategy::Node2Vec, WalkStrategy::Struc2Vec}) {
    if (iequals(graph_display_name(w), s)) return w;
  }
  if (iequals(s, "Struct2Vec")) return WalkStrategy::Struc2Vec;
  return std::nullopt;
}

std::optional<EmbedBlockConfig> parse_embed_term(std::string_view text) {
  return parse_term(strip_spaces(clean_text(text))).embed;
}
std::optional<SvBlockConfig> parse_sv_term(std::string_view text) {
  return parse_term(strip_spaces(clean_text(text))).sv;
}
std::optional<FreqBlockConfig> parse_freq_term(std::string_view text) {
  return parse_term(strip_spaces(clean_text(text))).freq;
}

std::string format_term(const EmbedBlockConfig& b) {
  return std::string(to_string(b.head)) + "(" + std::string(source_display_name(b.source)) + ")";
}

std::string format_term(const SvBlockConfig& b) {
  const std::string inner = b.pca ? "PCA(SVs)" : "SVs";
  return b.head ? std::string(to_string(*b.head)) + "(" + inner + ")" : inner;
}

std::string format_term(const FreqBlockConfig& b) {
  std::string inner;
  for (const auto& f : b.features) inner += (inner.empty() ? "" : " + ") + f;
  const std::string pca = "PCA(" + inner + ")";
  return b.head ? std::string(to_string(*b.head)) + "(" + pca + ")" : pca;
}

RunConfig parse_settings(std::string_view text, const RunConfig& base) {
  RunConfig cfg = base;
  cfg.embed.reset();
  cfg.sv.reset();
  cfg.freq.reset();
  cfg.graph.reset();
  if (strip_spaces(text).empty()) throw Error("settings: empty settings string");
  for (const auto& term : split_top_level(clean_text(text))) {
    const Term t = parse_term(term);
    set_once(cfg.embed, t.embed, "embedding", term);
    set_once(cfg.sv, t.sv, "SV", term);
    set_once(cfg.freq, t.freq, "frequency", term);
    set_once(cfg.graph, t.graph, "graph", term);
  }
  if (!cfg.has_text_block()) {
    throw Error("settings \"" + std::string(text) +
                "\" select no text block; add an embedding, SV or frequency term (a graph vector alone cannot "
                "classify a tweet)");
  }
  return cfg;
}

std::string format_settings(const RunConfig& cfg) {
  std::vector<std::string> terms;
  if (cfg.embed) terms.push_back(format_term(*cfg.embed));
  if (cfg.sv) terms.push_back(format_term(*cfg.sv));
  if (cfg.freq) terms.push_back(format_term(*cfg.freq));
  if (cfg.graph) terms.emplace_back(graph_display_name(*cfg.graph));
  std::string out;
  for (const auto& t : terms) out += (out.empty() ? "" : " + ") + t;
  return out;
}

std::string normalize_settings(std::string_view text) { return format_settings(parse_settings(text)); }

EmbeddingSource RunConfig::sv_base() const {
  if (sv_source) return *sv_source;
  return embed ? embed->source : EmbeddingSource::FastTextIt;
}

void RunConfig::validate() const {
  if (!has_text_block()) throw Error("config selects no text block (embedding, SV or frequency)");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw Error("config: train_ratio must lie in (0, 1)");
  if (max_len == 0) throw Error("config: max_len must be >= 1");
  if (freq && freq->features.empty()) throw Error("config: frequency block lists no features");
  if (freq && freq_pca_k == 0) throw Error("config: freq_pca_k must be >= 1");
  if (sv && sv->pca && sv_pca_k == 0) throw Error("config: sv_pca_k must be >= 1");
  auto check_head = [&](std::optional<HeadKind> kind, std::size_t len, std::string_view what) {
    if (!kind) return;
    HeadConfig h = head;
    h.kind = *kind;
    try {
      head_output_dim(h, len, 1);
    } catch (const Error& e) {
      throw Error("config: " + std::string(what) + " head: " + e.what());
    }
  };
  if (embed) check_head(embed->head, max_len, "embedding");
  if (sv) check_head(sv->head, max_len, "SV");
  fusion.validate();
  if (graph) {
    WalkConfig w = walks;
    w.strategy = *graph;
    w.validate();
    if (skipgram.dim < 2) throw Error("config: skipgram.dim must be >= 2");
  }
}

std::string run_config_to_json(const RunConfig& cfg, int indent) {
  json j;
  j["settings"] = format_settings(cfg);
  j["preprocess"] = std::string(to_string(cfg.preprocess));
  j["train_ratio"] = cfg.train_ratio;
  j["split_seed"] = cfg.split_seed;
  j["seed"] = cfg.seed;
  j["max_len"] = cfg.max_len;
  j["sv_pca_k"] = cfg.sv_pca_k;
  j["freq_pca_k"] = cfg.freq_pca_k;
  j["embedding_dim"] = cfg.embedding_dim ? json(*cfg.embedding_dim) : json(nullptr);
  j["sv_source"] = cfg.sv_source ? json(std::string(to_string(*cfg.sv_source))) : json(nullptr);
  j["require_friendship"] = cfg.require_friendship;
  j["run_t100"] = cfg.run_t100;
  j["head"] = to_json_value(cfg.head);
  j["fusion"] = to_json_value(cfg.fusion);
  j["walks"] = to_json_value(cfg.walks);
  j["skipgram"] = to_json_value(cfg.skipgram);
  j["frequency"] = to_json_value(cfg.frequency);
  return j.dump(indent);
}

RunConfig run_config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("config JSON: ") + e.what());
  }
  check_keys(j,
             {"settings", "preprocess", "train_ratio", "split_seed", "seed", "max_len", "sv_pca_k", "freq_pca_k",
              "embedding_dim", "sv_source", "require_friendship", "run_t100", "head", "fusion", "walks", "skipgram",
              "frequency"},
             "config");
  RunConfig cfg;
  try {
    if (j.contains("preprocess")) cfg.preprocess = parse_preprocess_mode(j["preprocess"].get<std::string>());
    read_opt(j, "train_ratio", cfg.train_ratio);
    read_opt(j, "split_seed", cfg.split_seed);
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "max_len", cfg.max_len);
    read_opt(j, "sv_pca_k", cfg.sv_pca_k);
    read_opt(j, "freq_pca_k", cfg.freq_pca_k);
    if (j.contains("embedding_dim") && !j["embedding_dim"].is_null()) {
      cfg.embedding_dim = j["embedding_dim"].get<std::size_t>();
    }
    if (j.contains("sv_source") && !j["sv_source"].is_null()) {
      const auto name = j["sv_source"].get<std::string>();
      cfg.sv_source = parse_source_display_name(name);
      if (!cfg.sv_source) throw Error("config: unknown sv_source \"" + name + "\" (valid: " + valid_sources() + ")");
    }
    read_opt(j, "require_friendship", cfg.require_friendship);
    read_opt(j, "run_t100", cfg.run_t100);
    if (j.contains("head")) from_json_value(j["head"], cfg.head);
    if (j.contains("fusion")) from_json_value(j["fusion"], cfg.fusion);
    if (j.contains("walks")) from_json_value(j["walks"], cfg.walks);
    if (j.contains("skipgram")) from_json_value(j["skipgram"], cfg.skipgram);
    if (j.contains("frequency")) from_json_value(j["frequency"], cfg.frequency);
  } catch (const json::exception& e) {
    throw Error(std::string("config JSON: ") + e.what());
  }
  if (!j.contains("settings")) throw Error("config JSON: missing \"settings\"");
  return parse_settings(j["settings"].get<std::string>(), cfg);
}

RunConfig load_run_config(std::string_view file_or_settings) {
  const std::filesystem::path p{std::string(file_or_settings)};
  std::error_code ec;
  if (std::filesystem::is_regular_file(p, ec)) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      return run_config_from_json(ss.str());
    } catch (const Error& e) {
      throw Error(p.string() + ": " + e.what());
    }
  }
  return parse_settings(file_or_settings);
}

}  // namespace stancelab
