#include "stancelab/metrics.hpp"

#include "stancelab/error.hpp"

#include <string>

namespace stancelab {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Confusion confusion_matrix(const std::vector<StanceLabel>& preds, const std::vector<StanceLabel>& gold) {
  if (preds.size() != gold.size()) {
    throw Error("metrics: " + std::to_string(preds.size()) + " predictions for " + std::to_string(gold.size()) +
                " gold labels");
  }
  if (gold.empty()) throw Error("metrics: empty label list");
  Confusion c{};
  for (std::size_t i = 0; i < gold.size(); ++i) ++c[index_of(gold[i])][index_of(preds[i])];
  return c;
}

Scores evaluate(const std::vector<StanceLabel>& preds, const std::vector<StanceLabel>& gold) {
  Scores s;
  s.confusion = confusion_matrix(preds, gold);
  std::size_t correct = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    std::size_t predicted = 0, actual = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      predicted += s.confusion[j][k];
      actual += s.confusion[k][j];
    }
    const std::size_t tp = s.confusion[k][k];
    correct += tp;
    auto& cs = s.per_class[k];
    cs.precision = ratio(tp, predicted);
    cs.recall = ratio(tp, actual);
    const double den = cs.precision + cs.recall;
    cs.f1 = den == 0.0 ? 0.0 : 2.0 * cs.precision * cs.recall / den;
    cs.support = actual;
  }
  s.accuracy = ratio(correct, gold.size());
  s.f_avg = (s.of(StanceLabel::Against).f1 + s.of(StanceLabel::Favor).f1) / 2.0;
  return s;
}

double f_avg(const std::vector<StanceLabel>& preds, const std::vector<StanceLabel>& gold) {
  return evaluate(preds, gold).f_avg;
}

}  // namespace stancelab
