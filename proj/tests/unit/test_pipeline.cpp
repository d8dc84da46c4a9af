#include "stancelab/error.hpp"
#include "stancelab/pipeline.hpp"
#include "stancelab/report.hpp"
#include "stancelab/synthetic.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace stancelab;

namespace {

SyntheticDataset tiny_dataset(std::uint64_t seed = 3) {
  SyntheticSpec s;
  s.users = 40;
  s.train_tweets = 160;
  s.test_tweets = 40;
  s.tokens_per_tweet = 6;
  s.filler_vocab = 60;
  s.cue_words_per_class = 4;
  s.embedding_dim = 6;
  s.p_within = 0.2;
  s.p_across = 0.01;
  s.seed = seed;
  return make_homophily_corpus(s);
}

Resources resources_of(const SyntheticDataset& d) {
  Resources r(d.train, d.test, d.relations);
  r.set_embeddings(EmbeddingSource::Custom, std::make_shared<const EmbeddingTable>(d.embeddings));
  return r;
}

RunConfig tiny_config(const std::string& settings) {
  RunConfig c = parse_settings(settings);
  c.max_len = 6;
  c.freq_pca_k = 8;
  c.sv_pca_k = 4;
  c.head.filter_sizes_2d = {1, 2};
  c.head.filters_per_head = 4;
  c.head.lstm_units = 3;
  c.head.lstm_units_2 = 3;
  c.head.attention_units = 4;
  c.fusion.hidden_units = 8;
  c.fusion.optimizer.max_epochs = 2;
  c.walks.walks_per_node = 3;
  c.walks.walk_length = 8;
  c.skipgram.dim = 8;
  c.skipgram.epochs = 1;
  c.frequency.chargram_max_features = 50;
  c.seed = 11;
  c.split_seed = 5;
  return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RunResult fake_result(const std::string& settings, double eval, std::optional<double> t80_test,
                      std::optional<double> t100_test) {
  RunResult r;
  r.config = parse_settings(settings);
  r.run_id = "run-" + settings.substr(0, 4) + std::to_string(static_cast<int>(eval * 1000));
  Scores s;
  s.f_avg = eval;
  r.t80.eval = s;
  if (t80_test) {
    Scores t;
    t.f_avg = *t80_test;
    r.t80.test = t;
  }
  if (t100_test) {
    RegimeResult reg;
    Scores t;
    t.f_avg = *t100_test;
    reg.test = t;
    r.t100 = reg;
  }
  return r;
}

}  // namespace

TEST(Synthetic, ShapeAndDeterminism) {
  const auto a = tiny_dataset();
  const auto b = tiny_dataset();
  EXPECT_EQ(a.train.size(), 160u);
  EXPECT_EQ(a.test.size(), 40u);
  EXPECT_EQ(a.user_ids.size(), 40u);
  ASSERT_EQ(a.relations.size(), b.relations.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].text, b.train[i].text);
  const auto other = tiny_dataset(4);
  bool differs = other.relations.size() != a.relations.size();
  for (std::size_t i = 0; i < a.train.size() && !differs; ++i) differs = other.train[i].text != a.train[i].text;
  EXPECT_TRUE(differs);
}

TEST(Synthetic, WriteAndReloadDirectory) {
  const auto d = tiny_dataset();
  const auto dir = fresh_dir("stancelab_synth");
  write_dataset(d, dir);
  const auto r = Resources::from_directory(dir);
  EXPECT_EQ(r.train().size(), d.train.size());
  ASSERT_TRUE(r.test());
  EXPECT_EQ(r.test()->size(), d.test.size());
  ASSERT_TRUE(r.relations());
  EXPECT_EQ(r.relations()->size(), d.relations.size());
  EXPECT_EQ(r.embeddings(EmbeddingSource::Custom, std::nullopt)->size(), d.embeddings.size());
}

TEST(Pipeline, MissingEmbeddingNamesFile) {
  const auto d = tiny_dataset();
  const auto dir = fresh_dir("stancelab_noemb");
  write_dataset(d, dir);
  const auto r = Resources::from_directory(dir);
  try {
    run(tiny_config("Conv2D(TWITA300) + PCA(length)"), r);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("twita300"), std::string::npos) << msg;
    EXPECT_NE(msg.find("Conv2D(TWITA300)"), std::string::npos) << msg;  // run context
  }
}

TEST(Pipeline, DeterministicRun) {
  const auto d = tiny_dataset();
  const auto res = resources_of(d);
  auto cfg = tiny_config("Conv2D(Custom) + PCA(unigram + length) + DeepWalk");
  cfg.run_t100 = true;
  const auto a = run(cfg, res);
  const auto b = run(cfg, res);
  EXPECT_EQ(a.run_id, b.run_id);
  EXPECT_EQ(a.eval_f_avg(), b.eval_f_avg());
  EXPECT_EQ(a.t80_test_f_avg(), b.t80_test_f_avg());
  EXPECT_EQ(a.t100_test_f_avg(), b.t100_test_f_avg());
  EXPECT_EQ(a.t80.history.loss, b.t80.history.loss);
  ASSERT_TRUE(a.t100);
  EXPECT_EQ(a.t100->train_size, d.train.size());
  EXPECT_EQ(a.t80.train_size, 128u);
  EXPECT_EQ(a.t100->history.loss.size(), std::max<std::size_t>(1, a.t80.history.best_epoch));
  EXPECT_EQ(a.test_predictions.size(), d.test.size());
  for (double m : {a.eval_f_avg(), a.accuracy(), *a.t100_test_f_avg()}) {
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
  }
}

TEST(Pipeline, EveryHeadAndBlockKindRuns) {
  const auto d = tiny_dataset();
  const auto res = resources_of(d);
  for (const std::string s : {"Conv1D(Custom)", "BiLSTM(Custom) + PCA(SVs)", "AttLSTM(Custom) + AttLSTM(PCA(SVs))",
                              "Conv2D(PCA(chargrams + Tfidf_chargrams + hashtags))",
                              "PCA(puntuactionmarks + mentions + network_retweet_community + userinfobio + "
                              "tweetinfocreateat) + Node2Vec",
                              "PCA(Tfidf_unigram) + Struc2Vec"}) {
    auto cfg = tiny_config(s);
    if (s.rfind("Conv1D", 0) == 0) {
      cfg.head.kernel_1d = 3;
      cfg.head.filters_1d = 4;
    }
    cfg.sv_source = EmbeddingSource::Custom;
    try {
      const auto r = run(cfg, res);
      EXPECT_GE(r.eval_f_avg(), 0.0) << s;
    } catch (const std::exception& e) {
      ADD_FAILURE() << s << ": " << e.what();
    }
  }
}

TEST(Pipeline, RunResultJsonRoundTrip) {
  const auto d = tiny_dataset();
  auto cfg = tiny_config("Conv2D(Custom) + PCA(length) + DeepWalk");
  const auto r = run(cfg, resources_of(d));
  const auto text = run_result_to_json(r);
  const auto back = run_result_from_json(text);
  EXPECT_EQ(run_result_to_json(back), text);
  EXPECT_EQ(back.run_id, r.run_id);
  EXPECT_EQ(back.eval_f_avg(), r.eval_f_avg());
  EXPECT_EQ(format_settings(back.config), format_settings(r.config));
  EXPECT_EQ(back.versions, r.versions);

  const auto dir = fresh_dir("stancelab_results");
  const auto path = save_run_result(r, dir);
  EXPECT_EQ(path.filename().string(), r.run_id + ".json");
  const auto loaded = load_run_results(dir);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].run_id, r.run_id);
}

TEST(Pipeline, RunManyKeepsOrderAndReportsErrors) {
  const auto d = tiny_dataset();
  const auto res = resources_of(d);
  std::vector<RunConfig> configs = {tiny_config("PCA(length)"), tiny_config("Conv2D(GloVe) + PCA(length)"),
                                    tiny_config("PCA(unigram)")};
  const auto out = run_many(configs, res, 2);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[0].result);
  EXPECT_FALSE(out[1].result);
  EXPECT_NE(out[1].error.find("glove"), std::string::npos) << out[1].error;
  ASSERT_TRUE(out[2].result);
  EXPECT_EQ(out[2].result->run_id, run(configs[2], res).run_id);
}

TEST(Ablation, PairDiffersOnlyInToggledBlock) {
  const auto d = tiny_dataset();
  const auto res = resources_of(d);
  const auto a = ablate(tiny_config("Conv2D(Custom) + PCA(length)"), AblationToggle::Graph, res);
  EXPECT_EQ(format_settings(a.with_block.config), "Conv2D(Custom) + PCA(length) + DeepWalk");
  EXPECT_EQ(format_settings(a.without_block.config), "Conv2D(Custom) + PCA(length)");
  EXPECT_DOUBLE_EQ(a.eval_delta(), a.with_block.eval_f_avg() - a.without_block.eval_f_avg());
  EXPECT_EQ(parse_ablation_toggle("sv"), AblationToggle::Sv);
  EXPECT_THROW(parse_ablation_toggle("embed"), Error);
}

TEST(Report, StructureWithBaseline) {
  const std::vector<RunResult> results = {fake_result("PCA(length)", 0.5, 0.55, std::nullopt),
                                          fake_result("PCA(unigram)", 0.6, 0.52, 0.71)};
  const auto rep = build_report(results);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].settings, "PCA(unigram)");
  EXPECT_EQ(rep.rows[0].rank, "1");
  EXPECT_EQ(rep.rows[1].settings, "PCA(length)");
  EXPECT_EQ(rep.rows[2].rank, "baseline");
  EXPECT_EQ(rep.rows[2].t80, 0.628);
  EXPECT_EQ(rep.rows[2].t100, 0.628);
  EXPECT_FALSE(rep.rows[2].eval_f_avg);
  EXPECT_THROW(build_report({}), Error);
}

TEST(Report, MarkdownIsValidTable) {
  const auto md = render_report(build_report({fake_result("PCA(length)", 0.5, 0.55, 0.6)}), ReportFormat::Markdown);
  std::istringstream in(md);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "| # | Eval f-avg | T%80 | T%100 | Settings |");
  EXPECT_EQ(lines[1], "|---|---|---|---|---|");
  for (const auto& l : lines) {
    EXPECT_EQ(l.front(), '|');
    EXPECT_EQ(l.back(), '|');
    EXPECT_EQ(std::count(l.begin(), l.end(), '|'), 6) << l;
  }
  EXPECT_NE(lines[3].find("0.628"), std::string::npos);
  EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
}

TEST(Report, CsvRoundTripAtSixDecimals) {
  const auto rep = build_report({fake_result("Conv2D(FastText) + PCA(unigram + length) + DeepWalk", 0.6123456789,
                                             0.7012344, std::nullopt),
                                 fake_result("PCA(length)", 0.4, std::nullopt, std::nullopt)});
  const auto csv = render_report(rep, ReportFormat::Csv);
  EXPECT_EQ(csv.rfind("rank,eval_f_avg,t80,t100,settings\n", 0), 0u);
  const auto back = load_report_csv(csv);
  ASSERT_EQ(back.rows.size(), rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].rank, rep.rows[i].rank);
    EXPECT_EQ(back.rows[i].settings, rep.rows[i].settings);
    for (auto field : {&ReportRow::eval_f_avg, &ReportRow::t80, &ReportRow::t100}) {
      ASSERT_EQ((back.rows[i].*field).has_value(), (rep.rows[i].*field).has_value());
      if ((rep.rows[i].*field)) EXPECT_NEAR(*(back.rows[i].*field), *(rep.rows[i].*field), 5e-7);
    }
  }
  EXPECT_EQ(render_report(back, ReportFormat::Csv), csv);
}
