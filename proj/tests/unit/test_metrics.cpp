#include "stancelab/error.hpp"
#include "stancelab/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace stancelab;
using namespace stancelab::testing;

namespace {
constexpr auto A = StanceLabel::Against;
constexpr auto F = StanceLabel::Favor;
constexpr auto N = StanceLabel::None;
}  // namespace

TEST(FAvg, HandComputedExample) {
  const std::vector<StanceLabel> gold = {A, A, F, F, N, N};
  const std::vector<StanceLabel> pred = {A, F, F, F, N, A};
  const auto s = evaluate(pred, gold);
  EXPECT_NEAR(s.of(A).f1, 0.5, 1e-12);
  EXPECT_NEAR(s.of(F).f1, 0.8, 1e-12);
  EXPECT_NEAR(s.f_avg, 0.65, 1e-12);
  EXPECT_NEAR(f_avg(pred, gold), 0.65, 1e-12);
  EXPECT_NEAR(s.accuracy, 4.0 / 6, 1e-12);
  EXPECT_EQ(s.confusion[index_of(N)][index_of(A)], 1u);
}

TEST(FAvg, PerfectAndAllNone) {
  const std::vector<StanceLabel> gold = {A, F, N, A};
  EXPECT_EQ(f_avg(gold, gold), 1.0);
  EXPECT_EQ(f_avg({N, N, N, N}, gold), 0.0);
}

TEST(FAvg, Errors) {
  EXPECT_THROW(f_avg({A}, {A, F}), Error);
  EXPECT_THROW(f_avg({}, {}), Error);
}

TEST(FAvg, MatchesOracleOnRandomVectors) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 40);
    const auto gold = random_labels(rng, n);
    const auto pred = random_labels(rng, n);
    ASSERT_EQ(f_avg(pred, gold), f_avg_oracle(pred, gold)) << "trial " << trial;
  }
}

TEST(FAvg, PermutationInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 30);
    auto gold = random_labels(rng, n);
    auto pred = random_labels(rng, n);
    const double before = f_avg(pred, gold);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<StanceLabel> g2, p2;
    for (auto i : perm) {
      g2.push_back(gold[i]);
      p2.push_back(pred[i]);
    }
    ASSERT_EQ(f_avg(p2, g2), before);
  }
}

TEST(Baseline, Constants) {
  EXPECT_EQ(BaselineConstants::task_a, 0.578);
  EXPECT_EQ(BaselineConstants::task_b, 0.628);
}
