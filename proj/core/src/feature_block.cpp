#include "stancelab/feature_block.hpp"

#include "stancelab/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace stancelab {

static_assert(std::endian::native == std::endian::little,
              "feature block container assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'L', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("feature block: truncated container");
  return v;
}

}  // namespace

void FeatureBlock::check_finite() const {
  if (!matrix.allFinite()) {
    throw Error("feature block '" + name + "' contains NaN or Inf entries");
  }
}

FeatureBlock hconcat(const std::vector<FeatureBlock>& blocks, std::string name) {
  FeatureBlock out;
  out.name = std::move(name);
  if (blocks.empty()) return out;
  const Eigen::Index rows = blocks.front().matrix.rows();
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    if (b.kind != BlockKind::Vector) throw Error("hconcat: '" + b.name + "' is a sequence block");
    if (b.matrix.rows() != rows) {
      throw Error("hconcat: row mismatch for block '" + b.name + "'");
    }
    cols += b.matrix.cols();
  }
  out.matrix.resize(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.matrix.middleCols(at, b.matrix.cols()) = b.matrix;
    at += b.matrix.cols();
    out.ordering.push_back(b.name + ":" + std::to_string(b.matrix.cols()));
  }
  return out;
}

void save_block(const FeatureBlock& block, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature block: " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(block.matrix.rows()));
  write_pod(out, static_cast<std::uint64_t>(block.matrix.cols()));
  out.write(reinterpret_cast<const char*>(block.matrix.data()),
            static_cast<std::streamsize>(sizeof(double) * block.matrix.size()));

  nlohmann::json side;
  side["name"] = block.name;
  side["dims"] = {block.matrix.rows(), block.matrix.cols()};
  side["kind"] = block.kind == BlockKind::Vector ? "vector" : "sequence";
  side["seq_len"] = block.seq_len;
  side["ordering"] = block.ordering;
  std::ofstream js(path.string() + ".json");
  js << side.dump(2) << '\n';
}

FeatureBlock load_block(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read feature block: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
    throw Error("not a feature block container: " + path.string());
  }
  if (read_pod<std::uint32_t>(in) != kVersion) {
    throw Error("unsupported feature block version: " + path.string());
  }
  const auto rows = read_pod<std::uint64_t>(in);
  const auto cols = read_pod<std::uint64_t>(in);
  FeatureBlock block;
  block.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(block.matrix.data()),
          static_cast<std::streamsize>(sizeof(double) * rows * cols));
  if (!in) throw Error("feature block: truncated payload in " + path.string());

  std::ifstream js(path.string() + ".json");
  if (!js) throw Error("feature block sidecar missing: " + path.string() + ".json");
  const auto side = nlohmann::json::parse(js);
  block.name = side.at("name").get<std::string>();
  block.kind = side.at("kind").get<std::string>() == "sequence" ? BlockKind::Sequence
                                                                : BlockKind::Vector;
  block.seq_len = side.value("seq_len", std::size_t{0});
  block.ordering = side.value("ordering", std::vector<std::string>{});
  const auto dims = side.at("dims").get<std::vector<std::uint64_t>>();
  if (dims.size() != 2 || dims[0] != rows || dims[1] != cols) {
    throw Error("feature block sidecar dims disagree with container: " + path.string());
  }
  return block;
}

}  // namespace stancelab
