#include "stancelab/error.hpp"
#include "stancelab/fusion.hpp"
#include "stancelab/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

using namespace stancelab;
using namespace stancelab::testing;

namespace {

BlockSpec plain(FusionBlock slot, std::size_t dim) { return BlockSpec{slot, std::nullopt, 0, dim}; }

BlockSpec headed(FusionBlock slot, HeadKind kind, std::size_t L, std::size_t d) {
  HeadConfig h;
  h.kind = kind;
  h.filter_sizes_2d = {1, 2};
  h.filters_per_head = 3;
  h.lstm_units = 2;
  h.lstm_units_2 = 3;
  h.attention_units = 4;
  h.conv_init_std = 0.5;
  h.seed = 5;
  return BlockSpec{slot, h, L, d};
}

FusionData make_data(Rng& rng, const std::vector<BlockSpec>& specs, std::size_t n) {
  FusionData data;
  for (std::size_t i = 0; i < n; ++i) data.ids.push_back("i" + std::to_string(i));
  data.labels = random_labels(rng, n);
  for (const auto& s : specs) {
    BlockInput b;
    b.slot = s.slot;
    if (s.head) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t active = 1 + uniform_index(rng, s.seq_len);
        SequenceMatrix m{random_matrix(rng, static_cast<Eigen::Index>(s.seq_len), static_cast<Eigen::Index>(s.input_dim)),
                         std::vector<bool>(s.seq_len, false)};
        for (std::size_t t = 0; t < active; ++t) m.mask[t] = true;
        for (std::size_t t = active; t < s.seq_len; ++t) m.rows.row(static_cast<Eigen::Index>(t)).setZero();
        b.sequences.push_back(std::move(m));
      }
    } else {
      b.vectors = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.input_dim));
    }
    data.blocks.push_back(std::move(b));
  }
  return data;
}

FusionConfig small_fusion(std::uint64_t seed = 1) {
  FusionConfig c;
  c.hidden_units = 6;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Assemble, DimsAndOrder) {
  const std::vector<BlockSpec> specs = {plain(FusionBlock::EmbedHead, 128), plain(FusionBlock::SvHead, 100),
                                        plain(FusionBlock::FreqPca, 100), plain(FusionBlock::GraphUser, 128)};
  std::vector<BlockVector> blocks;
  for (const auto& s : specs) {
    blocks.push_back({s.slot, Vector::Constant(static_cast<Eigen::Index>(s.input_dim), index_of(StanceLabel::None) +
                                                                                        static_cast<int>(s.slot))});
  }
  const auto v = assemble(blocks, specs);
  EXPECT_EQ(v.size(), 456);
  std::reverse(blocks.begin(), blocks.end());
  EXPECT_EQ(assemble(blocks, specs), v);
  EXPECT_EQ(v[0], 2.0);
  EXPECT_EQ(v[455], 5.0);

  const std::vector<BlockSpec> only = {plain(FusionBlock::FreqPca, 100)};
  EXPECT_EQ(assemble({{FusionBlock::FreqPca, Vector::Ones(100)}}, only).size(), 100);
}

TEST(Assemble, Errors) {
  const std::vector<BlockSpec> specs = {plain(FusionBlock::FreqPca, 4)};
  EXPECT_THROW(assemble({{FusionBlock::FreqPca, Vector::Ones(5)}}, specs), Error);
  EXPECT_THROW(assemble({{FusionBlock::GraphUser, Vector::Ones(4)}}, specs), Error);
  EXPECT_THROW(assemble({{FusionBlock::FreqPca, Vector::Ones(4)}, {FusionBlock::FreqPca, Vector::Ones(4)}}, specs),
               Error);
}

TEST(Prediction, ArgmaxAndTies) {
  EXPECT_EQ(argmax_label({0.2, 0.5, 0.3}), StanceLabel::Favor);
  EXPECT_EQ(argmax_label({0.4, 0.4, 0.2}), StanceLabel::Against);
  EXPECT_EQ(argmax_label({0.1, 0.45, 0.45}), StanceLabel::Favor);
  EXPECT_EQ(argmax_label({1.0 / 3, 1.0 / 3, 1.0 / 3}), StanceLabel::Against);
}

TEST(Prediction, SoftmaxProperties) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 3> z{10 * standard_normal(rng), 10 * standard_normal(rng), 10 * standard_normal(rng)};
    const auto p = softmax(z);
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-6);
    for (double x : p) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
    const double c = 50 * standard_normal(rng);
    const auto shifted = softmax({z[0] + c, z[1] + c, z[2] + c});
    EXPECT_EQ(argmax_label(shifted), argmax_label(p));
    // Strictly increasing transform of the logits.
    EXPECT_EQ(argmax_label({std::exp(z[0] / 10), std::exp(z[1] / 10), std::exp(z[2] / 10)}), argmax_label(p));
    EXPECT_EQ(argmax_label({std::atan(z[0]), std::atan(z[1]), std::atan(z[2])}), argmax_label(z));
  }
}

TEST(StanceModel, InitialLossIsLn3) {
  Rng rng(2);
  const std::vector<BlockSpec> specs = {plain(FusionBlock::FreqPca, 7), plain(FusionBlock::GraphUser, 3)};
  StanceModel model(specs, small_fusion());
  const auto data = make_data(rng, specs, 20);
  std::vector<std::size_t> rows(20);
  std::iota(rows.begin(), rows.end(), 0);
  EXPECT_NEAR(model.loss(data, rows, false), std::log(3.0), 1e-12);
  for (const auto& p : model.predict(data)) {
    for (double x : p.probs) EXPECT_NEAR(x, 1.0 / 3, 1e-12);
  }
}

TEST(StanceModel, InferenceDeterministicAndDropoutFree) {
  Rng rng(3);
  const std::vector<BlockSpec> specs = {plain(FusionBlock::FreqPca, 5)};
  auto cfg = small_fusion();
  cfg.zero_init_output = false;
  StanceModel a(specs, cfg);
  cfg.dropout_rate = 0.7;
  StanceModel b(specs, cfg);
  const auto data = make_data(rng, specs, 10);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto p1 = a.predict(data, i), p2 = a.predict(data, i), p3 = b.predict(data, i);
    EXPECT_EQ(p1.probs, p2.probs);
    EXPECT_EQ(p1.probs, p3.probs);
  }
}

TEST(StanceModel, ZeroLearningRateLeavesParamsUnchanged) {
  Rng rng(4);
  const std::vector<BlockSpec> specs = {headed(FusionBlock::EmbedHead, HeadKind::Cnn2dMulti, 4, 3),
                                        plain(FusionBlock::FreqPca, 5)};
  auto cfg = small_fusion();
  cfg.zero_init_output = false;
  cfg.optimizer.learning_rate = 0.0;
  cfg.optimizer.max_epochs = 4;
  cfg.optimizer.batch_size = 8;
  StanceModel model(specs, cfg);
  const auto before = model.snapshot();
  const auto data = make_data(rng, specs, 30);
  model.train(data, nullptr);
  const auto after = model.snapshot();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i], after[i]);
}

TEST(StanceModel, FusedGradientCheck) {
  Rng rng(5);
  for (auto kind : {HeadKind::Cnn1d, HeadKind::Cnn2dMulti, HeadKind::BiLstm, HeadKind::AttBiLstm}) {
    std::vector<BlockSpec> specs = {headed(FusionBlock::EmbedHead, kind, 5, 3), plain(FusionBlock::FreqPca, 4),
                                    plain(FusionBlock::GraphUser, 3)};
    if (kind == HeadKind::Cnn1d) {
      specs[0].head->kernel_1d = 2;
      specs[0].head->filters_1d = 2;
    }
    auto cfg = small_fusion(9);
    cfg.zero_init_output = false;
    StanceModel model(specs, cfg);
    // zero conv bias over zero padding lands exactly on the ReLU kink
    for (auto* p : model.params()) p->value += random_matrix(rng, p->value.rows(), p->value.cols(), 0.1);
    const auto data = make_data(rng, specs, 6);
    const std::vector<std::size_t> rows = {0, 1, 2, 3, 4, 5};
    const auto g = check_param_gradients(
        model.params(), [&] { return model.loss(data, rows, false); },
        [&] { model.loss(data, rows, true); }, 1e-5, 40);
    EXPECT_LT(g.max_rel_error, 1e-4) << to_string(kind) << ": " << g.worst;
  }
}

TEST(StanceModel, OverfitsThirtyInstances) {
  Rng rng(6);
  const std::vector<BlockSpec> specs = {plain(FusionBlock::FreqPca, 10)};
  FusionConfig cfg;
  cfg.seed = 6;
  cfg.optimizer.max_epochs = 200;
  StanceModel model(specs, cfg);
  const auto data = make_data(rng, specs, 30);
  const auto h = model.train(data, nullptr);
  std::vector<StanceLabel> pred;
  for (const auto& p : model.predict(data)) pred.push_back(p.label);
  EXPECT_GE(evaluate(pred, data.labels).accuracy, 0.95);
  EXPECT_EQ(h.loss.size(), 200u);
  EXPECT_LT(h.loss.back(), h.loss.front());
}

TEST(StanceModel, EarlyStoppingRestoresBest) {
  Rng rng(7);
  const std::vector<BlockSpec> specs = {plain(FusionBlock::FreqPca, 6)};
  auto cfg = small_fusion(7);
  cfg.optimizer.max_epochs = 40;
  cfg.optimizer.patience = 3;
  cfg.optimizer.learning_rate = 0.05;
  StanceModel model(specs, cfg);
  const auto train = make_data(rng, specs, 40);
  const auto eval = make_data(rng, specs, 20);  // random labels: eval f-avg plateaus fast
  const auto h = model.train(train, &eval);
  ASSERT_GE(h.best_epoch, 1u);
  EXPECT_EQ(h.eval_f_avg.size(), h.loss.size());
  EXPECT_EQ(h.train_accuracy.size(), h.loss.size());
  EXPECT_DOUBLE_EQ(h.best_eval_f_avg, *std::max_element(h.eval_f_avg.begin(), h.eval_f_avg.end()));
  EXPECT_DOUBLE_EQ(h.eval_f_avg[h.best_epoch - 1], h.best_eval_f_avg);
  if (h.stopped_early) {
    EXPECT_EQ(h.loss.size(), h.best_epoch + cfg.optimizer.patience);
  }
  std::vector<StanceLabel> pred;
  for (const auto& p : model.predict(eval)) pred.push_back(p.label);
  EXPECT_DOUBLE_EQ(f_avg(pred, eval.labels), h.best_eval_f_avg);
}

TEST(StanceModel, TrainingDeterministic) {
  Rng rng(8);
  const std::vector<BlockSpec> specs = {headed(FusionBlock::EmbedHead, HeadKind::BiLstm, 4, 3),
                                        plain(FusionBlock::GraphUser, 3)};
  auto cfg = small_fusion(8);
  cfg.optimizer.max_epochs = 3;
  const auto data = make_data(rng, specs, 20);
  StanceModel a(specs, cfg), b(specs, cfg);
  const auto ha = a.train(data, &data);
  const auto hb = b.train(data, &data);
  EXPECT_EQ(ha.loss, hb.loss);
  EXPECT_EQ(a.snapshot(), b.snapshot());
}

TEST(StanceModel, DataErrors) {
  Rng rng(9);
  const std::vector<BlockSpec> specs = {plain(FusionBlock::FreqPca, 4)};
  StanceModel model(specs, small_fusion());
  EXPECT_THROW(model.train(FusionData{}, nullptr), Error);
  auto bad = make_data(rng, {plain(FusionBlock::FreqPca, 5)}, 4);
  EXPECT_THROW(model.predict(bad), Error);
  auto nan = make_data(rng, specs, 4);
  nan.blocks[0].vectors(0, 0) = std::nan("");
  try {
    model.train(nan, nullptr);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos) << e.what();
  }
  FusionConfig c;
  c.dropout_rate = 1.0;
  EXPECT_THROW(StanceModel(specs, c), Error);
  EXPECT_THROW(StanceModel({}, FusionConfig{}), Error);
}

TEST(Checkpoint, RoundTrip) {
  Rng rng(10);
  const std::vector<BlockSpec> specs = {headed(FusionBlock::SvHead, HeadKind::AttBiLstm, 4, 3),
                                        plain(FusionBlock::FreqPca, 5)};
  auto cfg = small_fusion(10);
  cfg.optimizer.max_epochs = 2;
  StanceModel model(specs, cfg);
  const auto data = make_data(rng, specs, 12);
  model.train(data, nullptr);
  const auto p = std::filesystem::temp_directory_path() / "stancelab_model.slck";
  save_checkpoint(model, p);
  auto back = load_checkpoint(p);
  EXPECT_EQ(back.snapshot(), model.snapshot());
  EXPECT_EQ(back.fused_dim(), model.fused_dim());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(back.predict(data, i).probs, model.predict(data, i).probs);

  std::ofstream(p, std::ios::binary) << "JUNK";
  EXPECT_THROW(load_checkpoint(p), Error);
}

TEST(Predictions, CsvFormat) {
  const auto p = std::filesystem::temp_directory_path() / "stancelab_preds.csv";
  save_predictions(p, {"t1", "t2"}, {Prediction{{0.2, 0.5, 0.3}, StanceLabel::Favor},
                                     Prediction{{0.7, 0.2, 0.1}, StanceLabel::Against}});
  std::ifstream in(p);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "id,against_p,favor_p,none_p,label");
  EXPECT_EQ(first.rfind("t1,", 0), 0u);
  EXPECT_NE(first.find(",FAVOR"), std::string::npos);
}
