#include "stancelab/error.hpp"
#include "stancelab/skipgram.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace stancelab;
using namespace stancelab::testing;

namespace {

double cosine(const Vector& a, const Vector& b) { return a.dot(b) / (a.norm() * b.norm()); }

SkipGramModel toy_model(Rng& rng, std::size_t n, std::size_t dim) {
  SkipGramModel m;
  for (std::size_t i = 0; i < n; ++i) m.ids.push_back("n" + std::to_string(i));
  m.input = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim), 0.5);
  m.output = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim), 0.5);
  return m;
}

WalkCorpus repeated_pair(std::size_t copies) {
  WalkCorpus c;
  c.ids = {"a", "b"};
  c.walks.assign(copies, {0, 1});
  return c;
}

}  // namespace

TEST(SkipGram, GradientMatchesFiniteDifferences) {
  Rng rng(1);
  auto model = toy_model(rng, 5, 6);
  const SgnsSample sample{1, 3, {0, 4, 2}};
  const auto grad = sgns_gradient(model, sample);
  const double h = 1e-6;
  double worst = 0;
  for (Eigen::Index k = 0; k < 6; ++k) {
    double& x = model.input(1, k);
    const double keep = x;
    x = keep + h;
    const double up = sgns_loss(model, sample);
    x = keep - h;
    const double down = sgns_loss(model, sample);
    x = keep;
    worst = std::max(worst, rel_error(grad.center[k], (up - down) / (2 * h)));
  }
  for (const auto& [row, g] : grad.outputs) {
    for (Eigen::Index k = 0; k < 6; ++k) {
      double& x = model.output(row, k);
      const double keep = x;
      x = keep + h;
      const double up = sgns_loss(model, sample);
      x = keep - h;
      const double down = sgns_loss(model, sample);
      x = keep;
      worst = std::max(worst, rel_error(g[k], (up - down) / (2 * h)));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(SkipGram, SgdStepEqualsGradientStep) {
  Rng rng(2);
  auto model = toy_model(rng, 5, 4);
  const SgnsSample sample{0, 2, {1, 3}};
  const auto grad = sgns_gradient(model, sample);
  auto expected = model;
  expected.input.row(0) -= 0.1 * grad.center.transpose();
  for (const auto& [row, g] : grad.outputs) expected.output.row(row) -= 0.1 * g.transpose();
  Vector scratch;
  const double before = sgns_loss(model, sample);
  EXPECT_DOUBLE_EQ(sgns_sgd_step(model, sample, 0.1, scratch), before);
  EXPECT_LT((model.input - expected.input).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((model.output - expected.output).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SkipGram, RepeatedPairCosineRisesEachEpoch) {
  const auto corpus = repeated_pair(50);
  double prev = -2.0;
  for (std::size_t epochs = 1; epochs <= 5; ++epochs) {
    SkipGramConfig cfg;
    cfg.dim = 16;
    cfg.window = 1;
    cfg.negatives = 1;
    cfg.epochs = epochs;
    cfg.seed = 3;
    const auto r = train_skipgram(corpus, cfg);
    const double c = cosine(user_vector(r.embedding, "a"), user_vector(r.embedding, "b"));
    EXPECT_GT(c, prev) << "epochs " << epochs;
    prev = c;
  }
}

TEST(SkipGram, LossDecreasesOverEpochs) {
  WalkCorpus corpus;
  corpus.ids = {"a", "b", "c", "d"};
  for (int i = 0; i < 40; ++i) corpus.walks.push_back({0, 1, 0, 1, 2, 3, 2, 3});
  SkipGramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 8;
  cfg.window = 1;
  const auto r = train_skipgram(corpus, cfg);
  ASSERT_EQ(r.history.epoch_loss.size(), 8u);
  EXPECT_LT(r.history.epoch_loss.back(), r.history.epoch_loss.front());
}

TEST(SkipGram, TwoCliquesSeparate) {
  std::map<std::pair<std::string, std::string>, std::uint8_t> masks;
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        if (i != j) masks[{"c" + std::to_string(side) + "_" + std::to_string(i),
                           "c" + std::to_string(side) + "_" + std::to_string(j)}] = 1;
      }
    }
  }
  masks[{"c0_0", "c1_0"}] = 1;
  masks[{"c1_0", "c0_0"}] = 1;
  const auto g = InteractionGraph::from_masks(masks);
  WalkConfig wc;
  wc.seed = 4;
  SkipGramConfig sc;
  sc.dim = 32;
  sc.seed = 4;
  const auto r = train_skipgram(generate_walks(g, wc), sc);
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (const auto& u : g.ids()) {
    for (const auto& v : g.ids()) {
      if (u >= v) continue;
      const double c = cosine(user_vector(r.embedding, u), user_vector(r.embedding, v));
      if (u[1] == v[1]) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  EXPECT_GE(intra / n_intra - inter / n_inter, 0.2);
}

TEST(SkipGram, Errors) {
  SkipGramConfig cfg;
  cfg.window = 0;
  EXPECT_THROW(train_skipgram(repeated_pair(3), cfg), Error);
  cfg = {};
  cfg.dim = 1;
  EXPECT_THROW(train_skipgram(repeated_pair(3), cfg), Error);
  cfg = {};
  EXPECT_THROW(train_skipgram(WalkCorpus{}, cfg), Error);
}

TEST(SkipGram, DeterministicAndFinite) {
  const auto g = ten_node_fixture();
  SkipGramConfig cfg;
  cfg.dim = 12;
  cfg.seed = 8;
  const auto walks = generate_walks(g, WalkConfig{});
  const auto a = train_skipgram(walks, cfg);
  const auto b = train_skipgram(walks, cfg);
  EXPECT_EQ(a.embedding.table().vectors(), b.embedding.table().vectors());
  EXPECT_TRUE(a.embedding.table().vectors().allFinite());
  EXPECT_EQ(a.embedding.size(), 10u);
}

TEST(UserVector, KnownUnknownAndDim) {
  const auto g = ten_node_fixture();
  SkipGramConfig cfg;
  cfg.dim = 128;
  cfg.epochs = 1;
  const auto r = train_skipgram(generate_walks(g, WalkConfig{}), cfg);
  const auto known = user_vector(r.embedding, "n3");
  EXPECT_EQ(known.size(), 128);
  EXPECT_EQ(known, r.embedding.table().row(*r.embedding.table().find("n3")).transpose());
  const auto unknown = user_vector(r.embedding, "stranger");
  EXPECT_EQ(unknown.size(), 128);
  EXPECT_EQ(unknown.norm(), 0.0);
}

TEST(UserVector, VectorKinds) {
  SkipGramConfig cfg;
  cfg.dim = 4;
  cfg.vectors = NodeVectorKind::Input;
  const auto r = train_skipgram(repeated_pair(5), cfg);
  EXPECT_EQ(r.embedding.table().vectors(), r.model.input);
  cfg.vectors = NodeVectorKind::Sum;
  const auto s = train_skipgram(repeated_pair(5), cfg);
  EXPECT_LT((s.embedding.table().vectors() - (s.model.input + s.model.output)).cwiseAbs().maxCoeff(), 1e-15);
}
