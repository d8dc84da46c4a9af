#include "json_io.hpp"
#include "stancelab/error.hpp"
#include "stancelab/fusion.hpp"

#include <cstdint>
#include <fstream>

namespace stancelab {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(path.string() + ": truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(StanceModel& model, const std::filesystem::path& path) {
  json meta;
  meta["specs"] = json::array();
  for (const auto& s : model.specs()) meta["specs"].push_back(to_json_value(s));
  meta["fusion"] = to_json_value(model.config());
  meta["params"] = json::array();
  const auto params = model.params();
  for (const auto* p : params) meta["params"].push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  const std::string text = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

StanceModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw Error(path.string() + ": not a checkpoint");
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw Error(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = read_pod<std::uint64_t>(in, path);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error(path.string() + ": truncated checkpoint");
  json meta;
  try {
    meta = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": bad checkpoint header: " + e.what());
  }
  std::vector<BlockSpec> specs;
  for (const auto& s : meta.at("specs")) specs.push_back(block_spec_from_json(s));
  FusionConfig cfg;
  from_json_value(meta.at("fusion"), cfg);
  StanceModel model(std::move(specs), cfg);
  const auto params = model.params();
  const auto& listed = meta.at("params");
  if (listed.size() != params.size()) throw Error(path.string() + ": parameter count does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    if (listed[i].at("name").get<std::string>() != p->name ||
        listed[i].at("rows").get<Eigen::Index>() != p->value.rows() ||
        listed[i].at("cols").get<Eigen::Index>() != p->value.cols()) {
      throw Error(path.string() + ": parameter " + std::to_string(i) + " (" + p->name + ") does not match");
    }
    if (!in.read(reinterpret_cast<char*>(p->value.data()),
                 static_cast<std::streamsize>(p->value.size() * sizeof(double)))) {
      throw Error(path.string() + ": truncated parameter data");
    }
  }
  return model;
}

}  // namespace stancelab
