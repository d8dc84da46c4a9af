#include "stancelab/search.hpp"

#include "json_io.hpp"
#include "stancelab/error.hpp"
#include "stancelab/random.hpp"

#include <fstream>
#include <sstream>

namespace stancelab {

std::size_t ConfigSpace::combinations() const {
  return embed.size() * sv.size() * freq.size() * graph.size() * preprocess.size();
}

namespace {

template <class T>
const T& pick(const std::vector<T>& axis, Rng& rng) {
  return axis[uniform_index(rng, axis.size())];
}

bool is_none(const std::string& s) { return s == "none" || s == "None" || s == "NONE" || s.empty(); }

template <class T, class F>
std::vector<std::optional<T>> read_axis(const json& j, const char* key, F parse) {
  std::vector<std::optional<T>> out;
  if (!j.contains(key)) return {std::nullopt};
  for (const auto& item : j[key]) {
    const auto s = item.get<std::string>();
    if (is_none(s)) {
      out.push_back(std::nullopt);
      continue;
    }
    auto v = parse(s);
    if (!v) throw Error(std::string("search space: \"") + s + "\" is not a valid " + key + " term");
    out.push_back(v);
  }
  if (out.empty()) throw Error(std::string("search space: axis \"") + key + "\" is empty");
  return out;
}

}  // namespace

RunConfig sample_config(const ConfigSpace& space, std::uint64_t seed) {
  if (space.combinations() == 0) throw Error("search space is empty");
  Rng rng = derive_rng(seed, "sample_config");
  std::string last_error;
  for (std::size_t attempt = 0; attempt < kMaxRedraws; ++attempt) {
    RunConfig cfg = space.base;
    cfg.embed = pick(space.embed, rng);
    cfg.sv = pick(space.sv, rng);
    cfg.freq = pick(space.freq, rng);
    cfg.graph = pick(space.graph, rng);
    cfg.preprocess = pick(space.preprocess, rng);
    try {
      cfg.validate();
      return cfg;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error("search space exhausted: " + std::to_string(kMaxRedraws) + " draws were all invalid (last: " +
              last_error + ")");
}

ConfigSpace config_space_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("search space JSON: ") + e.what());
  }
  check_keys(j, {"embed", "sv", "freq", "graph", "preprocess", "base"}, "search space");
  ConfigSpace s;
  s.embed = read_axis<EmbedBlockConfig>(j, "embed", parse_embed_term);
  s.sv = read_axis<SvBlockConfig>(j, "sv", parse_sv_term);
  s.freq = read_axis<FreqBlockConfig>(j, "freq", parse_freq_term);
  s.graph = read_axis<WalkStrategy>(j, "graph", parse_graph_term);
  if (j.contains("preprocess")) {
    s.preprocess.clear();
    for (const auto& p : j["preprocess"]) s.preprocess.push_back(parse_preprocess_mode(p.get<std::string>()));
    if (s.preprocess.empty()) throw Error("search space: axis \"preprocess\" is empty");
  }
  if (j.contains("base")) {
    json base = j["base"];
    // The base only supplies defaults; its block selection is replaced per draw.
    if (!base.contains("settings")) base["settings"] = "PCA(length)";
    s.base = run_config_from_json(base.dump());
  }
  return s;
}

ConfigSpace load_config_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read search space " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return config_space_from_json(ss.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace stancelab
