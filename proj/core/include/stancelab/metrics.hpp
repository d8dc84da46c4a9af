#pragma once

#include "stancelab/label.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace stancelab {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// confusion[gold][pred]
using Confusion = std::array<std::array<std::size_t, 3>, 3>;

struct Scores {
  std::array<ClassScores, 3> per_class{};
  double accuracy = 0.0;
  double f_avg = 0.0;
  Confusion confusion{};

  const ClassScores& of(StanceLabel l) const { return per_class[static_cast<std::size_t>(index_of(l))]; }
};

Confusion confusion_matrix(const std::vector<StanceLabel>& preds, const std::vector<StanceLabel>& gold);

// Mean of the AGAINST and FAVOR F1; NONE is scored elsewhere but not averaged.
// Zero denominators give 0. Throws on length mismatch or empty input.
double f_avg(const std::vector<StanceLabel>& preds, const std::vector<StanceLabel>& gold);

Scores evaluate(const std::vector<StanceLabel>& preds, const std::vector<StanceLabel>& gold);

struct BaselineConstants {
  static constexpr double task_a = 0.578;
  static constexpr double task_b = 0.628;
};

}  // namespace stancelab
