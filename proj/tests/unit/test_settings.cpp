#include "stancelab/error.hpp"
#include "stancelab/search.hpp"
#include "stancelab/settings.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace stancelab;

namespace {

// The ten reference settings strings, verbatim (including their spacing quirks).
const std::vector<std::string> kReferenceRows = {
    R"(Conv2D(FastText) + Conv2D(PCA(SVs)) + PCA(unigram + Tfidf\_unigram + length) + DeepWalk)",
    R"(Conv2D( FastText ) + Conv2D( PCA(SVs) ) + PCA(unigram + Tfidf\_unigram + length))",
    R"(Conv2D(FastText)+ Conv2D(PCA(SVs)) + Conv2D(PCA(Tfidf\_unigram + chargrams)) + DeepWalk)",
    R"(Conv2D(FastText)+Conv2D(PCA(SVs))+PCA(Tfidf\_unigram + chargrams))",
    R"(Conv2D(FastText) + Conv2D( PCA(SVs)) + PCA(unigram + length)+ DeepWalk)",
    R"(Conv2D(FastText + Conv2D(PCA(SVs)) + PCA(unigram + length))",
    R"(Conv2D(TWITA300) + Conv2D(PCA(SVs)) + PCA( length + network\_quote\_community + network\_reply\_community + network\_retweet\_community + network\_friend\_community + userinfobio + tweetinfocreateat) + DeepWalk)",
    R"(Conv2D(TWITA300) + Conv2D(PCA(SVs)) + PCA( length + network\_quote\_community + network\_reply\_community + network\_retweet\_community + network\_friend\_community + userinfobio + tweetinfocreateat))",
    R"(AttLSTM(FastText) + AttLSTM(PCA(SVs)) + PCA(puntuactionmarks + length + network\_quote\_community + network\_retweet\_community + network\_friend\_community + userinfobio) + Node2Vec)",
    R"(AttLSTM(FastText) + AttLSTM(PCA(SVs)) + PCA(puntuactionmarks + length + network\_quote\_community + network\_retweet\_community + network\_friend\_community + userinfobio))",
};

// Hand-written canonical forms, frozen.
const std::vector<std::string> kNormalized = {
    "Conv2D(FastText) + Conv2D(PCA(SVs)) + PCA(unigram + Tfidf_unigram + length) + DeepWalk",
    "Conv2D(FastText) + Conv2D(PCA(SVs)) + PCA(unigram + Tfidf_unigram + length)",
    "Conv2D(FastText) + Conv2D(PCA(SVs)) + Conv2D(PCA(Tfidf_unigram + chargrams)) + DeepWalk",
    "Conv2D(FastText) + Conv2D(PCA(SVs)) + PCA(Tfidf_unigram + chargrams)",
    "Conv2D(FastText) + Conv2D(PCA(SVs)) + PCA(unigram + length) + DeepWalk",
    "Conv2D(FastText) + Conv2D(PCA(SVs)) + PCA(unigram + length)",
    "Conv2D(TWITA300) + Conv2D(PCA(SVs)) + PCA(length + network_quote_community + network_reply_community + "
    "network_retweet_community + network_friend_community + userinfobio + tweetinfocreateat) + DeepWalk",
    "Conv2D(TWITA300) + Conv2D(PCA(SVs)) + PCA(length + network_quote_community + network_reply_community + "
    "network_retweet_community + network_friend_community + userinfobio + tweetinfocreateat)",
    "AttLSTM(FastText) + AttLSTM(PCA(SVs)) + PCA(puntuactionmarks + length + network_quote_community + "
    "network_retweet_community + network_friend_community + userinfobio) + Node2Vec",
    "AttLSTM(FastText) + AttLSTM(PCA(SVs)) + PCA(puntuactionmarks + length + network_quote_community + "
    "network_retweet_community + network_friend_community + userinfobio)",
};

}  // namespace

TEST(Settings, ReferenceRowsNormalizeAndRoundTrip) {
  for (std::size_t i = 0; i < kReferenceRows.size(); ++i) {
    EXPECT_EQ(normalize_settings(kReferenceRows[i]), kNormalized[i]) << "row " << i + 1;
    EXPECT_EQ(format_settings(parse_settings(kNormalized[i])), kNormalized[i]) << "row " << i + 1;
    EXPECT_EQ(parse_settings(kReferenceRows[i]).embed, parse_settings(kNormalized[i]).embed);
  }
}

TEST(Settings, FirstRowStructure) {
  const auto c = parse_settings(kReferenceRows[0]);
  ASSERT_TRUE(c.embed);
  EXPECT_EQ(c.embed->head, HeadKind::Cnn2dMulti);
  EXPECT_EQ(c.embed->source, EmbeddingSource::FastTextIt);
  ASSERT_TRUE(c.sv);
  EXPECT_EQ(c.sv->head, HeadKind::Cnn2dMulti);
  EXPECT_TRUE(c.sv->pca);
  ASSERT_TRUE(c.freq);
  EXPECT_EQ(c.freq->features, (std::vector<std::string>{"unigram", "Tfidf_unigram", "length"}));
  EXPECT_FALSE(c.freq->head);
  EXPECT_EQ(c.graph, WalkStrategy::DeepWalk);
}

TEST(Settings, OtherRowsStructure) {
  const auto r3 = parse_settings(kReferenceRows[2]);
  EXPECT_EQ(r3.freq->head, HeadKind::Cnn2dMulti);
  const auto r7 = parse_settings(kReferenceRows[6]);
  EXPECT_EQ(r7.embed->source, EmbeddingSource::Twita300);
  EXPECT_EQ(r7.freq->features.size(), 7u);
  const auto r9 = parse_settings(kReferenceRows[8]);
  EXPECT_EQ(r9.embed->head, HeadKind::AttBiLstm);
  EXPECT_EQ(r9.graph, WalkStrategy::Node2Vec);
  EXPECT_FALSE(parse_settings(kReferenceRows[9]).graph);
}

TEST(Settings, GraphOnlyRejected) {
  try {
    parse_settings("DeepWalk");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("text"), std::string::npos) << e.what();
  }
}

TEST(Settings, UnknownNamesListValidOnes) {
  const std::map<std::string, std::string> cases = {
      {"Conv3D(FastText)", "AttLSTM"},
      {"Conv2D(Word2Vec)", "TWITA300"},
      {"PCA(unigram + bigram)", "Tfidf_unigram"},
      {"Conv2D(FastText) + GraphSage", "Node2Vec"},
  };
  for (const auto& [text, expected] : cases) {
    try {
      parse_settings(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(expected), std::string::npos) << text << ": " << e.what();
    }
  }
}

TEST(Settings, OtherTermForms) {
  EXPECT_EQ(normalize_settings("BiLSTM(GloVe) + PCA(SVs) + Struct2Vec"), "BiLSTM(GloVe) + PCA(SVs) + Struc2Vec");
  EXPECT_EQ(normalize_settings("conv1d(twita100) + Conv2D(SVs)"), "Conv1D(TWITA100) + Conv2D(SVs)");
  EXPECT_EQ(normalize_settings("PCA(length)"), "PCA(length)");
  EXPECT_THROW(parse_settings(""), Error);
  EXPECT_THROW(parse_settings("Conv2D(FastText) + Conv2D(TWITA300)"), Error);
}

TEST(Settings, JsonRoundTrip) {
  auto c = parse_settings(kReferenceRows[8]);
  c.seed = 42;
  c.split_seed = 7;
  c.max_len = 32;
  c.run_t100 = true;
  c.fusion.hidden_units = 64;
  c.fusion.optimizer.patience = 3;
  c.walks.walk_length = 20;
  c.walks.p = 0.25;
  c.skipgram.dim = 16;
  c.frequency.chargram_range = {1, 3};
  c.head.lstm_units = 8;
  c.sv_source = EmbeddingSource::Twita300;
  c.embedding_dim = 300;
  const auto text = run_config_to_json(c);
  const auto back = run_config_from_json(text);
  EXPECT_EQ(run_config_to_json(back), text);
  EXPECT_EQ(format_settings(back), format_settings(c));
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.walks.p, 0.25);
  EXPECT_EQ(back.sv_source, EmbeddingSource::Twita300);
}

TEST(Settings, JsonErrors) {
  EXPECT_THROW(run_config_from_json(R"({"seed": 1})"), Error);
  try {
    run_config_from_json(R"j({"settings": "PCA(length)", "sede": 1})j");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("sede"), std::string::npos) << e.what();
  }
  EXPECT_THROW(run_config_from_json("not json"), Error);
}

TEST(Search, SingletonSpace) {
  ConfigSpace space;
  space.embed = {EmbedBlockConfig{HeadKind::BiLstm, EmbeddingSource::GloveItWiki}};
  space.graph = {WalkStrategy::Node2Vec};
  EXPECT_EQ(space.combinations(), 1u);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(format_settings(sample_config(space, seed)), "BiLSTM(GloVe) + Node2Vec");
  }
}

namespace {

ConfigSpace wide_space() {
  ConfigSpace space;
  space.embed = {std::nullopt, EmbedBlockConfig{}, EmbedBlockConfig{HeadKind::AttBiLstm, EmbeddingSource::Twita300}};
  space.sv = {std::nullopt, SvBlockConfig{}};
  space.freq = {std::nullopt, FreqBlockConfig{{"unigram", "length"}, std::nullopt}};
  space.graph = {std::nullopt, WalkStrategy::DeepWalk, WalkStrategy::Struc2Vec};
  return space;
}

}  // namespace

TEST(Search, DeterministicAndValid) {
  const auto space = wide_space();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = sample_config(space, seed);
    EXPECT_EQ(format_settings(a), format_settings(sample_config(space, seed)));
    EXPECT_TRUE(a.has_text_block());
    EXPECT_NO_THROW(a.validate());
  }
}

TEST(Search, TwoOptionAxisBalanced) {
  ConfigSpace space;
  space.freq = {FreqBlockConfig{{"length"}, std::nullopt}};
  space.graph = {std::nullopt, WalkStrategy::DeepWalk};
  int with_graph = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) with_graph += sample_config(space, seed).graph ? 1 : 0;
  EXPECT_GE(with_graph, 450);
  EXPECT_LE(with_graph, 550);
}

TEST(Search, ExhaustedSpaceErrors) {
  ConfigSpace space;
  space.graph = {WalkStrategy::DeepWalk};  // no text block can ever be drawn
  try {
    sample_config(space, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("exhausted"), std::string::npos) << e.what();
  }
}

TEST(Search, SpaceFromJson) {
  const auto space = config_space_from_json(R"j({
    "embed": ["Conv2D(FastText)", "none"],
    "sv": ["Conv2D(PCA(SVs))"],
    "freq": ["PCA(unigram + length)"],
    "graph": ["DeepWalk", "Node2Vec", "none"],
    "preprocess": ["twita_clean", "none"],
    "base": {"settings": "PCA(length)", "seed": 3}
  })j");
  EXPECT_EQ(space.combinations(), 12u);
  EXPECT_EQ(space.base.seed, 3u);
  EXPECT_FALSE(space.embed[1].has_value());
  EXPECT_THROW(config_space_from_json(R"j({"embed": ["Conv9D(x)"]})j"), Error);
}
