#pragma once

#include "stancelab/corpus.hpp"
#include "stancelab/embedfeat.hpp"
#include "stancelab/fusion.hpp"
#include "stancelab/metrics.hpp"
#include "stancelab/netgraph.hpp"
#include "stancelab/settings.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stancelab {

inline constexpr std::string_view kVersion = "0.3.0";

// Inputs of a run. Embedding tables are loaded on first use from
// <data_dir>/embeddings/<source stem>.vec and shared between runs.
class Resources {
public:
  Resources() = default;
  Resources(Corpus train, std::optional<Corpus> test, std::optional<std::vector<RelationRecord>> relations);

  // Reads train.{csv,jsonl}, optional test.{csv,jsonl} and optional relations.csv.
  static Resources from_directory(const std::filesystem::path& dir);

  const Corpus& train() const { return train_; }
  const std::optional<Corpus>& test() const { return test_; }
  const std::optional<std::vector<RelationRecord>>& relations() const { return relations_; }
  const std::filesystem::path& data_dir() const { return data_dir_; }

  void set_embeddings(EmbeddingSource source, std::shared_ptr<const EmbeddingTable> table);
  // Throws naming the missing file.
  std::shared_ptr<const EmbeddingTable> embeddings(EmbeddingSource source, std::optional<std::size_t> dim) const;

private:
  Corpus train_;
  std::optional<Corpus> test_;
  std::optional<std::vector<RelationRecord>> relations_;
  std::filesystem::path data_dir_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  mutable std::map<EmbeddingSource, std::shared_ptr<const EmbeddingTable>> tables_;
};

struct RegimeResult {
  std::size_t train_size = 0;
  TrainHistory history;
  std::optional<Scores> eval;  // held-out split (T%80 only)
  std::optional<Scores> test;  // labeled test set
  double seconds = 0.0;
};

struct RunResult {
  std::string run_id;
  RunConfig config;
  RegimeResult t80;
  std::optional<RegimeResult> t100;
  double feature_seconds = 0.0;
  double total_seconds = 0.0;
  std::map<std::string, std::string> versions;
  // Final model's test-set output (T%100 when run, else T%80); not serialized.
  std::vector<std::string> test_ids;
  std::vector<Prediction> test_predictions;

  double eval_f_avg() const;                 // T%80 model on the held-out split
  std::optional<double> t80_test_f_avg() const;
  std::optional<double> t100_test_f_avg() const;
  // T%100 when present, else T%80 test, else eval.
  double ranking_score() const;
  double accuracy() const;                   // on the held-out split
};

// Features -> heads -> fusion -> train -> evaluate. T%80 trains on the
// stratified split with early stopping on the held-out part; with
// cfg.run_t100 and a test set, T%100 retrains on all training data for the
// epoch count T%80 selected and scores the test set.
RunResult run(const RunConfig& cfg, const Resources& resources);

std::string run_result_to_json(const RunResult& r, int indent = 2);
RunResult run_result_from_json(std::string_view text);
// Writes <dir>/<run_id>.json and returns the path.
std::filesystem::path save_run_result(const RunResult& r, const std::filesystem::path& dir);
std::vector<RunResult> load_run_results(const std::filesystem::path& dir);

enum class AblationToggle { Graph, Sv, Freq };
AblationToggle parse_ablation_toggle(std::string_view s);
std::string_view to_string(AblationToggle t);

struct AblationResult {
  AblationToggle toggle = AblationToggle::Graph;
  RunResult with_block;
  RunResult without_block;
  double eval_delta() const { return with_block.eval_f_avg() - without_block.eval_f_avg(); }
  std::optional<double> test_delta() const;
};

// Runs the pair differing only in the toggled block. When `cfg` lacks the
// block, a default one is added (DeepWalk, Conv2D(PCA(SVs)), PCA(all 14)).
AblationResult ablate(const RunConfig& cfg, AblationToggle toggle, const Resources& resources);

// Worker count from STANCELAB_THREADS (default 1, minimum 1).
std::size_t thread_budget();

struct RunOutcome {
  std::optional<RunResult> result;
  std::string error;  // set when the run threw
};

// Runs configs with up to `threads` concurrent runs; outcomes keep input order.
std::vector<RunOutcome> run_many(const std::vector<RunConfig>& configs, const Resources& resources,
                                std::size_t threads);

}  // namespace stancelab
