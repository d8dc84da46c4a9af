#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace stancelab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class BlockKind { Vector, Sequence };

// One named feature family: a row per instance. Sequence blocks store each
// instance's L x d matrix flattened row-major into its row (seq_len = L).
struct FeatureBlock {
  std::string name;
  Matrix matrix;
  BlockKind kind = BlockKind::Vector;
  std::size_t seq_len = 0;
  // Human-readable column groups, in column order, e.g. {"punct:1","hour:24"}.
  std::vector<std::string> ordering;

  std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(matrix.cols()); }

  // Throws if any entry is NaN or infinite.
  void check_finite() const;
};

// Horizontal concatenation of vector blocks with equal row counts.
FeatureBlock hconcat(const std::vector<FeatureBlock>& blocks, std::string name);

// Binary container "<path>" (magic SLFB, little-endian float64, row-major)
// plus JSON sidecar "<path>.json" holding {name, dims, kind, seq_len, ordering}.
void save_block(const FeatureBlock& block, const std::filesystem::path& path);
FeatureBlock load_block(const std::filesystem::path& path);

}  // namespace stancelab
