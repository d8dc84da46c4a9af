#pragma once

#include "stancelab/embedfeat.hpp"
#include "stancelab/feature_block.hpp"
#include "stancelab/heads.hpp"
#include "stancelab/label.hpp"
#include "stancelab/nn.hpp"
#include "stancelab/random.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stancelab {

// Fusion slots, in canonical concatenation order.
enum class FusionBlock { EmbedHead = 0, SvHead = 1, FreqPca = 2, GraphUser = 3 };

inline constexpr std::array<FusionBlock, 4> kFusionOrder{FusionBlock::EmbedHead, FusionBlock::SvHead,
                                                         FusionBlock::FreqPca, FusionBlock::GraphUser};

std::string_view to_string(FusionBlock b);
std::optional<FusionBlock> parse_fusion_block(std::string_view s);

// One input slot. With a head, inputs are seq_len x input_dim sequences;
// without, inputs are plain vectors of input_dim.
struct BlockSpec {
  FusionBlock slot = FusionBlock::FreqPca;
  std::optional<HeadConfig> head;
  std::size_t seq_len = 0;
  std::size_t input_dim = 0;

  std::size_t output_dim() const;
};

struct OptimizerConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
};

struct FusionConfig {
  double dropout_rate = 0.2;
  std::size_t hidden_units = 128;
  OptimizerConfig optimizer;
  // Zero final layer: uniform initial predictions, loss ln 3.
  bool zero_init_output = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Prediction {
  std::array<double, 3> probs{};
  StanceLabel label = StanceLabel::Against;
};

// Argmax with ties resolved toward the earlier class (AGAINST, FAVOR, NONE).
StanceLabel argmax_label(const std::array<double, 3>& scores);
std::array<double, 3> softmax(const std::array<double, 3>& logits);

struct BlockVector {
  FusionBlock slot;
  Vector value;
};

// Concatenate in canonical order; blocks must cover exactly the slots of
// `specs` with matching output dims.
Vector assemble(std::vector<BlockVector> blocks, const std::vector<BlockSpec>& specs);

// Per-slot inputs for a set of instances.
struct BlockInput {
  FusionBlock slot = FusionBlock::FreqPca;
  std::vector<SequenceMatrix> sequences;  // headed slots
  Matrix vectors;                         // plain slots: one row per instance
};

struct FusionData {
  std::vector<std::string> ids;
  std::vector<BlockInput> blocks;
  std::vector<StanceLabel> labels;  // may be empty for unlabeled data

  std::size_t size() const { return ids.size(); }
  FusionData subset(const std::vector<std::size_t>& rows) const;
};

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> eval_f_avg;  // empty without eval data
  std::vector<double> train_accuracy;
  std::size_t best_epoch = 0;      // 1-based; the restored parameters
  double best_eval_f_avg = 0.0;
  bool stopped_early = false;
};

class StanceModel {
public:
  StanceModel(std::vector<BlockSpec> specs, FusionConfig cfg);

  const std::vector<BlockSpec>& specs() const { return specs_; }
  const FusionConfig& config() const { return cfg_; }
  std::size_t fused_dim() const { return fused_dim_; }

  // Inference over the dense part only (dropout inactive unless rng given).
  Prediction classify(const Vector& fused, Rng* dropout_rng = nullptr) const;

  Vector fuse(const FusionData& data, std::size_t row) const;
  Prediction predict(const FusionData& data, std::size_t row) const;
  std::vector<Prediction> predict(const FusionData& data) const;

  // Mean cross-entropy over `rows`; when `accumulate`, adds d(mean loss)/d(param)
  // to every param's grad. Dropout applies only when rng is non-null.
  double loss(const FusionData& data, const std::vector<std::size_t>& rows, bool accumulate,
              Rng* dropout_rng = nullptr);

  TrainHistory train(const FusionData& train, const FusionData* eval);

  nn::ParamList params();
  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix>& values);

private:
  void check_data(const FusionData& data) const;

  std::vector<BlockSpec> specs_;
  FusionConfig cfg_;
  std::vector<std::unique_ptr<Head>> heads_;  // parallel to specs_, null for plain slots
  std::size_t fused_dim_ = 0;
  nn::Param w1_, b1_, w2_, b2_;
};

// CSV: id,against_p,favor_p,none_p,label
void save_predictions(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<Prediction>& preds);

// Single-file container: magic SLCK, JSON config (specs + fusion config +
// param names/shapes), then float64 parameter arrays in params() order.
void save_checkpoint(StanceModel& model, const std::filesystem::path& path);
StanceModel load_checkpoint(const std::filesystem::path& path);

}  // namespace stancelab
