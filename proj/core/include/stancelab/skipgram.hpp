#pragma once

#include "stancelab/embedfeat.hpp"
#include "stancelab/walks.hpp"

#include <cstdint>
#include <vector>

namespace stancelab {

enum class NodeVectorKind {
  Input,  // input (centre) vectors only
  Sum,    // input + output vectors
};

struct SkipGramConfig {
  std::size_t dim = 128;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  NodeVectorKind vectors = NodeVectorKind::Sum;
  std::uint64_t seed = 0;
};

// Dense parameters of a skip-gram model over `ids`.
struct SkipGramModel {
  std::vector<std::string> ids;
  Matrix input;   // |V| x dim
  Matrix output;  // |V| x dim
};

struct SgnsSample {
  std::uint32_t center;
  std::uint32_t context;
  std::vector<std::uint32_t> negatives;
};

// -log s(in_c . out_o) - sum_n log s(-in_c . out_n)
double sgns_loss(const SkipGramModel& model, const SgnsSample& sample);

struct SgnsGradient {
  Vector center;                                            // d loss / d input[center]
  std::vector<std::pair<std::uint32_t, Vector>> outputs;    // d loss / d output[row], one per target
};

SgnsGradient sgns_gradient(const SkipGramModel& model, const SgnsSample& sample);

// In-place SGD step equal to params -= lr * sgns_gradient when the targets are
// distinct (a repeated negative sees its earlier update). Returns the pre-step
// loss. `scratch` is resized as needed.
double sgns_sgd_step(SkipGramModel& model, const SgnsSample& sample, double lr, Vector& scratch);

struct SkipGramHistory {
  std::vector<double> epoch_loss;  // mean per-pair loss, measured before each update
};

class NodeEmbedding {
public:
  NodeEmbedding() = default;
  explicit NodeEmbedding(EmbeddingTable table) : table_(std::move(table)) {}

  std::size_t dim() const { return table_.dim(); }
  std::size_t size() const { return table_.size(); }
  const EmbeddingTable& table() const { return table_; }
  bool contains(std::string_view id) const { return table_.contains(id); }

private:
  EmbeddingTable table_;
};

struct SkipGramResult {
  NodeEmbedding embedding;
  SkipGramModel model;
  SkipGramHistory history;
};

// SGD over (centre, context) pairs within `window`, negatives drawn from the
// unigram^0.75 node distribution, linearly decaying learning rate, walks
// visited in a seeded shuffled order each epoch. Single-threaded.
SkipGramResult train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& cfg);

// Zero vector of `emb.dim()` for unknown users.
Vector user_vector(const NodeEmbedding& emb, std::string_view user_id);

}  // namespace stancelab
