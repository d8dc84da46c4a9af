#pragma once

#include "stancelab/settings.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace stancelab {

// Independent axes; nullopt entries mean "block absent". Every sampled
// config starts from `base`.
struct ConfigSpace {
  std::vector<std::optional<EmbedBlockConfig>> embed{std::nullopt};
  std::vector<std::optional<SvBlockConfig>> sv{std::nullopt};
  std::vector<std::optional<FreqBlockConfig>> freq{std::nullopt};
  std::vector<std::optional<WalkStrategy>> graph{std::nullopt};
  std::vector<PreprocessMode> preprocess{PreprocessMode::TwitaClean};
  RunConfig base;

  std::size_t combinations() const;
};

inline constexpr std::size_t kMaxRedraws = 1000;

// Uniform draw per axis; draws that fail RunConfig::validate() are redrawn.
// Throws when kMaxRedraws consecutive draws are all invalid.
RunConfig sample_config(const ConfigSpace& space, std::uint64_t seed);

// JSON: {"embed": ["Conv2D(FastText)", "none"], "sv": [...], "freq": [...],
//        "graph": ["DeepWalk", "none"], "preprocess": ["twita_clean"], "base": {config}}
ConfigSpace config_space_from_json(std::string_view json_text);
ConfigSpace load_config_space(const std::filesystem::path& path);

}  // namespace stancelab
