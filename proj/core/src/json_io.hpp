#pragma once

// JSON conversions shared by settings, checkpoints and run results.

#include "stancelab/freqfeat.hpp"
#include "stancelab/fusion.hpp"
#include "stancelab/heads.hpp"
#include "stancelab/skipgram.hpp"
#include "stancelab/walks.hpp"

#include <initializer_list>
#include <string_view>

#include "json.hpp"

namespace stancelab {

using json = nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

json to_json_value(const HeadConfig& c);
void from_json_value(const json& j, HeadConfig& c);
json to_json_value(const FusionConfig& c);
void from_json_value(const json& j, FusionConfig& c);
json to_json_value(const WalkConfig& c);
void from_json_value(const json& j, WalkConfig& c);
json to_json_value(const SkipGramConfig& c);
void from_json_value(const json& j, SkipGramConfig& c);
json to_json_value(const FrequencyOptions& c);
void from_json_value(const json& j, FrequencyOptions& c);
json to_json_value(const BlockSpec& s);
BlockSpec block_spec_from_json(const json& j);

}  // namespace stancelab
