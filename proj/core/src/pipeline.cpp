#include "stancelab/pipeline.hpp"

#include "json_io.hpp"
#include "stancelab/error.hpp"
#include "stancelab/freqfeat.hpp"
#include "stancelab/pca.hpp"
#include "stancelab/skipgram.hpp"
#include "stancelab/walks.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace stancelab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mix(std::uint64_t seed, std::string_view what) { return splitmix64(seed ^ fnv1a(what)); }

std::optional<std::filesystem::path> first_existing(const std::filesystem::path& dir, std::string_view stem) {
  for (const char* ext : {".csv", ".jsonl", ".json"}) {
    auto p = dir / (std::string(stem) + ext);
    if (std::filesystem::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

bool fully_labeled(const Corpus& c) {
  for (const auto& t : c.tweets()) {
    if (!t.label) return false;
  }
  return !c.empty();
}

std::vector<std::string> vocabulary_of(const Corpus& c) {
  std::set<std::string> words;
  for (const auto& t : c.tweets()) words.insert(t.tokens.begin(), t.tokens.end());
  return {words.begin(), words.end()};
}

HeadConfig head_for(const RunConfig& cfg, HeadKind kind, FusionBlock slot) {
  HeadConfig h = cfg.head;
  h.kind = kind;
  h.seed = cfg.head.seed ^ mix(cfg.seed, "head:" + std::string(to_string(slot)));
  return h;
}

// Unsupervised graph products, shared by both regimes of a run.
struct GraphContext {
  CommunityMap communities;
  std::optional<NodeEmbedding> embedding;
};

bool needs_communities(const RunConfig& cfg) {
  if (!cfg.freq) return false;
  for (const auto& f : cfg.freq->features) {
    if (f.rfind("network_", 0) == 0) return true;
  }
  return false;
}

GraphContext build_graph_context(const RunConfig& cfg, const Resources& res) {
  GraphContext ctx;
  const bool communities = needs_communities(cfg);
  if (!communities && !cfg.graph) return ctx;
  if (!res.relations()) {
    throw Error("run needs relations.csv in " + res.data_dir().string() + " for " +
                (cfg.graph ? "the graph block" : "network community features"));
  }
  const InteractionGraph g = build_graph(*res.relations(), cfg.require_friendship);
  if (communities) ctx.communities = detect_all_communities(g, mix(cfg.seed, "communities"));
  if (cfg.graph) {
    if (g.node_count() == 0) throw Error("relations.csv yields an empty interaction graph");
    WalkConfig w = cfg.walks;
    w.strategy = *cfg.graph;
    w.seed = cfg.walks.seed ^ mix(cfg.seed, "walks");
    SkipGramConfig sg = cfg.skipgram;
    sg.seed = cfg.skipgram.seed ^ mix(cfg.seed, "skipgram");
    ctx.embedding = train_skipgram(generate_walks(g, w), sg).embedding;
  }
  return ctx;
}

SequenceMatrix vector_as_sequence(const Vector& v) {
  SequenceMatrix s;
  s.rows = Matrix(v.size(), 1);
  s.rows.col(0) = v;
  s.mask.assign(static_cast<std::size_t>(v.size()), true);
  return s;
}

class FeatureBuilder {
public:
  FeatureBuilder(const RunConfig& cfg, const Resources& res, const GraphContext& graph)
      : cfg_(cfg), res_(res), graph_(graph) {}

  void fit(const Corpus& fit) {
    specs_.clear();
    if (cfg_.embed) {
      embed_table_ = res_.embeddings(cfg_.embed->source, cfg_.embedding_dim);
      specs_.push_back({FusionBlock::EmbedHead, head_for(cfg_, cfg_.embed->head, FusionBlock::EmbedHead),
                        cfg_.max_len, embed_table_->dim()});
    }
    if (cfg_.sv) {
      auto base = res_.embeddings(cfg_.sv_base(), cfg_.embed && cfg_.sv_base() == cfg_.embed->source
                                                      ? cfg_.embedding_dim
                                                      : std::nullopt);
      const auto train_vocab = vocabulary_of(fit);
      sim_ = std::make_unique<SimilarityTable>(build_similarity_table(base, train_vocab));
      if (sim_->dim() == 0) throw Error("SV block: no training word occurs in the " +
                                        std::string(to_string(cfg_.sv_base())) + " embeddings");
      sv_pca_.reset();
      if (cfg_.sv->pca) sv_pca_ = fit_sv_pca(*sim_, train_vocab, cfg_.sv_pca_k);
      const std::size_t width = sv_pca_ ? sv_pca_->output_dim() : sim_->dim();
      BlockSpec s{FusionBlock::SvHead, std::nullopt, cfg_.max_len, width};
      if (cfg_.sv->head) s.head = head_for(cfg_, *cfg_.sv->head, FusionBlock::SvHead);
      else s.seq_len = 0;
      specs_.push_back(s);
    }
    if (cfg_.freq) {
      freq_ = std::make_unique<FrequencyExtractor>(cfg_.freq->features, cfg_.frequency);
      freq_->fit(fit, graph_.communities);
      freq_pca_ = pca_fit(freq_->transform(fit), cfg_.freq_pca_k);
      const std::size_t k = freq_pca_->output_dim();
      if (cfg_.freq->head) {
        specs_.push_back({FusionBlock::FreqPca, head_for(cfg_, *cfg_.freq->head, FusionBlock::FreqPca), k, 1});
      } else {
        specs_.push_back({FusionBlock::FreqPca, std::nullopt, 0, k});
      }
    }
    if (cfg_.graph) specs_.push_back({FusionBlock::GraphUser, std::nullopt, 0, graph_.embedding->dim()});
    for (const auto& s : specs_) s.output_dim();  // surfaces head shape errors before training
  }

  const std::vector<BlockSpec>& specs() const { return specs_; }

  FusionData build(const Corpus& c) const {
    FusionData d;
    const auto n = static_cast<Eigen::Index>(c.size());
    for (const auto& t : c.tweets()) d.ids.push_back(t.id);
    if (fully_labeled(c)) d.labels = c.labels();
    if (cfg_.embed) {
      BlockInput b{FusionBlock::EmbedHead, {}, {}};
      for (const auto& t : c.tweets()) b.sequences.push_back(embed_sequence(t.tokens, *embed_table_, cfg_.max_len));
      d.blocks.push_back(std::move(b));
    }
    if (cfg_.sv) {
      const EmbeddingTable table = sv_embedding_table(*sim_, vocabulary_of(c), sv_pca_ ? &*sv_pca_ : nullptr);
      BlockInput b{FusionBlock::SvHead, {}, {}};
      if (!cfg_.sv->head) b.vectors = Matrix::Zero(n, static_cast<Eigen::Index>(table.dim()));
      for (Eigen::Index i = 0; i < n; ++i) {
        SequenceMatrix seq = embed_sequence(c[static_cast<std::size_t>(i)].tokens, table, cfg_.max_len);
        if (cfg_.sv->head) {
          b.sequences.push_back(std::move(seq));
          continue;
        }
        // Unheaded SVs: mean over the tweet's tokens.
        const std::size_t active = seq.active();
        for (std::size_t r = 0; r < seq.length(); ++r) {
          if (seq.mask[r]) b.vectors.row(i) += seq.rows.row(static_cast<Eigen::Index>(r));
        }
        if (active > 0) b.vectors.row(i) /= static_cast<double>(active);
      }
      d.blocks.push_back(std::move(b));
    }
    if (cfg_.freq) {
      const Matrix reduced = pca_transform(*freq_pca_, freq_->transform(c).matrix);
      BlockInput b{FusionBlock::FreqPca, {}, {}};
      if (cfg_.freq->head) {
        for (Eigen::Index i = 0; i < n; ++i) b.sequences.push_back(vector_as_sequence(reduced.row(i).transpose()));
      } else {
        b.vectors = reduced;
      }
      d.blocks.push_back(std::move(b));
    }
    if (cfg_.graph) {
      BlockInput b{FusionBlock::GraphUser, {}, Matrix(n, static_cast<Eigen::Index>(graph_.embedding->dim()))};
      for (Eigen::Index i = 0; i < n; ++i) {
        b.vectors.row(i) = user_vector(*graph_.embedding, c[static_cast<std::size_t>(i)].author_id).transpose();
      }
      d.blocks.push_back(std::move(b));
    }
    return d;
  }

private:
  const RunConfig& cfg_;
  const Resources& res_;
  const GraphContext& graph_;
  std::vector<BlockSpec> specs_;
  std::shared_ptr<const EmbeddingTable> embed_table_;
  std::unique_ptr<SimilarityTable> sim_;
  std::optional<PcaModel> sv_pca_;
  std::unique_ptr<FrequencyExtractor> freq_;
  std::optional<PcaModel> freq_pca_;
};

Scores score(const StanceModel& model, const FusionData& data, std::vector<Prediction>* keep = nullptr) {
  auto preds = model.predict(data);
  std::vector<StanceLabel> labels;
  for (const auto& p : preds) labels.push_back(p.label);
  if (keep) *keep = std::move(preds);
  return evaluate(labels, data.labels);
}

FusionConfig fusion_for(const RunConfig& cfg) {
  FusionConfig f = cfg.fusion;
  f.seed = cfg.fusion.seed ^ mix(cfg.seed, "fusion");
  return f;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Resources::Resources(Corpus train, std::optional<Corpus> test, std::optional<std::vector<RelationRecord>> relations)
    : train_(std::move(train)), test_(std::move(test)), relations_(std::move(relations)) {
  if (train_.empty()) throw Error("training corpus is empty");
}

Resources Resources::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("data directory not found: " + dir.string());
  auto train_path = first_existing(dir, "train");
  if (!train_path) throw Error("missing training corpus: " + (dir / "train.csv").string() + " (or train.jsonl)");
  std::optional<Corpus> test;
  if (auto p = first_existing(dir, "test")) test = load_corpus(*p);
  std::optional<std::vector<RelationRecord>> rel;
  if (std::filesystem::is_regular_file(dir / "relations.csv")) rel = load_relations(dir / "relations.csv");
  Resources r(load_corpus(*train_path), std::move(test), std::move(rel));
  r.data_dir_ = dir;
  return r;
}

void Resources::set_embeddings(EmbeddingSource source, std::shared_ptr<const EmbeddingTable> table) {
  std::lock_guard lock(*mutex_);
  tables_[source] = std::move(table);
}

std::shared_ptr<const EmbeddingTable> Resources::embeddings(EmbeddingSource source,
                                                            std::optional<std::size_t> dim) const {
  std::lock_guard lock(*mutex_);
  if (auto it = tables_.find(source); it != tables_.end()) {
    if (dim && it->second->dim() != *dim) {
      throw Error(std::string(to_string(source)) + " embeddings have dim " + std::to_string(it->second->dim()) +
                  ", config expects " + std::to_string(*dim));
    }
    return it->second;
  }
  const auto path = data_dir_ / "embeddings" / (std::string(to_string(source)) + ".vec");
  if (!std::filesystem::is_regular_file(path)) throw Error("missing embedding file: " + path.string());
  const auto expected = dim ? dim : nominal_dim(source);
  auto table = std::make_shared<const EmbeddingTable>(load_embeddings(path, expected, source));
  tables_[source] = table;
  return table;
}

double RunResult::eval_f_avg() const { return t80.eval ? t80.eval->f_avg : 0.0; }
double RunResult::accuracy() const { return t80.eval ? t80.eval->accuracy : 0.0; }

std::optional<double> RunResult::t80_test_f_avg() const {
  if (t80.test) return t80.test->f_avg;
  return std::nullopt;
}

std::optional<double> RunResult::t100_test_f_avg() const {
  if (t100 && t100->test) return t100->test->f_avg;
  return std::nullopt;
}

double RunResult::ranking_score() const {
  if (auto v = t100_test_f_avg()) return *v;
  if (auto v = t80_test_f_avg()) return *v;
  return eval_f_avg();
}

RunResult run(const RunConfig& cfg, const Resources& res) {
  cfg.validate();
  const auto t_start = Clock::now();
  RunResult out;
  out.config = cfg;
  out.run_id = "run-" + hex64(fnv1a(run_config_to_json(cfg, -1)));
  out.versions = {{"stancelab", std::string(kVersion)}, {"checkpoint", "1"}, {"feature_block", "1"}};

  try {
    const Corpus train = tokenize(res.train(), cfg.preprocess);
    std::optional<Corpus> test;
    if (res.test()) test = tokenize(*res.test(), cfg.preprocess);
    const bool test_labeled = test && fully_labeled(*test);

    auto t0 = Clock::now();
    const GraphContext graph = build_graph_context(cfg, res);
    const SplitResult split = stratified_split(train, {cfg.train_ratio, cfg.split_seed});
    FeatureBuilder fb80(cfg, res, graph);
    fb80.fit(split.train);
    const FusionData tr = fb80.build(split.train);
    const FusionData ev = fb80.build(split.eval);
    std::optional<FusionData> te80;
    if (test) te80 = fb80.build(*test);
    out.feature_seconds = seconds_since(t0);

    t0 = Clock::now();
    StanceModel m80(fb80.specs(), fusion_for(cfg));
    out.t80.train_size = tr.size();
    out.t80.history = m80.train(tr, &ev);
    out.t80.eval = score(m80, ev);
    if (test) {
      out.test_ids = te80->ids;
      if (test_labeled) out.t80.test = score(m80, *te80, &out.test_predictions);
      else out.test_predictions = m80.predict(*te80);
    }
    out.t80.seconds = seconds_since(t0);

    if (cfg.run_t100 && test) {
      t0 = Clock::now();
      FeatureBuilder fb100(cfg, res, graph);
      fb100.fit(train);
      const FusionData full = fb100.build(train);
      const FusionData te = fb100.build(*test);
      FusionConfig f = fusion_for(cfg);
      f.optimizer.max_epochs = std::max<std::size_t>(1, out.t80.history.best_epoch);
      StanceModel m100(fb100.specs(), f);
      RegimeResult r;
      r.train_size = full.size();
      r.history = m100.train(full, nullptr);
      if (test_labeled) r.test = score(m100, te, &out.test_predictions);
      else out.test_predictions = m100.predict(te);
      r.seconds = seconds_since(t0);
      out.t100 = std::move(r);
    }
  } catch (const Error& e) {
    throw Error("run \"" + format_settings(cfg) + "\": " + e.what());
  }
  out.total_seconds = seconds_since(t_start);
  return out;
}

// ------------------------------------------------------------------ JSON

namespace {

json scores_json(const Scores& s) {
  json per;
  for (auto l : kAllLabels) {
    const auto& c = s.of(l);
    per[std::string(to_string(l))] = {
        {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  }
  json conf = json::array();
  for (const auto& row : s.confusion) conf.push_back(row);
  return {{"f_avg", s.f_avg}, {"accuracy", s.accuracy}, {"per_class", per}, {"confusion", conf}};
}

Scores scores_from(const json& j) {
  Scores s;
  s.f_avg = j.at("f_avg").get<double>();
  s.accuracy = j.at("accuracy").get<double>();
  for (auto l : kAllLabels) {
    const auto& c = j.at("per_class").at(std::string(to_string(l)));
    auto& cs = s.per_class[static_cast<std::size_t>(index_of(l))];
    cs.precision = c.at("precision").get<double>();
    cs.recall = c.at("recall").get<double>();
    cs.f1 = c.at("f1").get<double>();
    cs.support = c.at("support").get<std::size_t>();
  }
  if (j.contains("confusion")) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) s.confusion[a][b] = j["confusion"][a][b].get<std::size_t>();
    }
  }
  return s;
}

json regime_json(const RegimeResult& r) {
  json j{{"train_size", r.train_size},
         {"seconds", r.seconds},
         {"best_epoch", r.history.best_epoch},
         {"best_eval_f_avg", r.history.best_eval_f_avg},
         {"stopped_early", r.history.stopped_early},
         {"loss", r.history.loss},
         {"eval_f_avg", r.history.eval_f_avg},
         {"train_accuracy", r.history.train_accuracy}};
  j["eval"] = r.eval ? scores_json(*r.eval) : json(nullptr);
  j["test"] = r.test ? scores_json(*r.test) : json(nullptr);
  return j;
}

RegimeResult regime_from(const json& j) {
  RegimeResult r;
  r.train_size = j.at("train_size").get<std::size_t>();
  r.seconds = j.value("seconds", 0.0);
  r.history.best_epoch = j.value("best_epoch", std::size_t{0});
  r.history.best_eval_f_avg = j.value("best_eval_f_avg", 0.0);
  r.history.stopped_early = j.value("stopped_early", false);
  read_opt(j, "loss", r.history.loss);
  read_opt(j, "eval_f_avg", r.history.eval_f_avg);
  read_opt(j, "train_accuracy", r.history.train_accuracy);
  if (j.contains("eval") && !j["eval"].is_null()) r.eval = scores_from(j["eval"]);
  if (j.contains("test") && !j["test"].is_null()) r.test = scores_from(j["test"]);
  return r;
}

}  // namespace

std::string run_result_to_json(const RunResult& r, int indent) {
  json j;
  j["run_id"] = r.run_id;
  j["settings"] = format_settings(r.config);
  j["config"] = json::parse(run_config_to_json(r.config, -1));
  j["seeds"] = {{"split_seed", r.config.split_seed}, {"seed", r.config.seed}};
  j["summary"] = {{"eval_f_avg", r.eval_f_avg()},
                  {"accuracy", r.accuracy()},
                  {"t80_test_f_avg", r.t80_test_f_avg() ? json(*r.t80_test_f_avg()) : json(nullptr)},
                  {"t100_test_f_avg", r.t100_test_f_avg() ? json(*r.t100_test_f_avg()) : json(nullptr)}};
  j["t80"] = regime_json(r.t80);
  j["t100"] = r.t100 ? regime_json(*r.t100) : json(nullptr);
  j["timing"] = {{"feature_seconds", r.feature_seconds}, {"total_seconds", r.total_seconds}};
  j["versions"] = r.versions;
  return j.dump(indent);
}

RunResult run_result_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunResult r;
    r.run_id = j.at("run_id").get<std::string>();
    r.config = run_config_from_json(j.at("config").dump());
    r.t80 = regime_from(j.at("t80"));
    if (j.contains("t100") && !j["t100"].is_null()) r.t100 = regime_from(j["t100"]);
    if (j.contains("timing")) {
      r.feature_seconds = j["timing"].value("feature_seconds", 0.0);
      r.total_seconds = j["timing"].value("total_seconds", 0.0);
    }
    read_opt(j, "versions", r.versions);
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("run result JSON: ") + e.what());
  }
}

std::filesystem::path save_run_result(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (r.run_id + ".json");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << run_result_to_json(r) << '\n';
  return path;
}

std::vector<RunResult> load_run_results(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("results directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunResult> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      out.push_back(run_result_from_json(ss.str()));
    } catch (const Error& e) {
      throw Error(f.string() + ": " + e.what());
    }
  }
  return out;
}

// ------------------------------------------------------------------ ablation

AblationToggle parse_ablation_toggle(std::string_view s) {
  if (s == "graph") return AblationToggle::Graph;
  if (s == "sv") return AblationToggle::Sv;
  if (s == "freq") return AblationToggle::Freq;
  throw Error("unknown ablation toggle \"" + std::string(s) + "\" (valid: graph, sv, freq)");
}

std::string_view to_string(AblationToggle t) {
  switch (t) {
    case AblationToggle::Graph: return "graph";
    case AblationToggle::Sv: return "sv";
    case AblationToggle::Freq: return "freq";
  }
  return "graph";
}

std::optional<double> AblationResult::test_delta() const {
  auto a = with_block.t100_test_f_avg() ? with_block.t100_test_f_avg() : with_block.t80_test_f_avg();
  auto b = without_block.t100_test_f_avg() ? without_block.t100_test_f_avg() : without_block.t80_test_f_avg();
  if (a && b) return *a - *b;
  return std::nullopt;
}

AblationResult ablate(const RunConfig& cfg, AblationToggle toggle, const Resources& res) {
  RunConfig with = cfg, without = cfg;
  switch (toggle) {
    case AblationToggle::Graph:
      if (!with.graph) with.graph = WalkStrategy::DeepWalk;
      without.graph.reset();
      break;
    case AblationToggle::Sv:
      if (!with.sv) with.sv = SvBlockConfig{};
      without.sv.reset();
      break;
    case AblationToggle::Freq:
      if (!with.freq) with.freq = FreqBlockConfig{{kFrequencyFeatureNames.begin(), kFrequencyFeatureNames.end()}, {}};
      without.freq.reset();
      break;
  }
  AblationResult r;
  r.toggle = toggle;
  r.with_block = run(with, res);
  r.without_block = run(without, res);
  return r;
}

std::size_t thread_budget() {
  const char* env = std::getenv("STANCELAB_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

std::vector<RunOutcome> run_many(const std::vector<RunConfig>& configs, const Resources& res, std::size_t threads) {
  std::vector<RunOutcome> out(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i].result = run(configs[i], res);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, configs.size()));
  if (threads == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace stancelab
