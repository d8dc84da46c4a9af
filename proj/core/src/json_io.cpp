#include "json_io.hpp"

#include "stancelab/error.hpp"

#include <algorithm>
#include <string>

namespace stancelab {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw Error(std::string(where) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string valid;
      for (auto a : allowed) valid += (valid.empty() ? "" : ", ") + std::string(a);
      throw Error(std::string(where) + ": unknown key \"" + key + "\" (valid: " + valid + ")");
    }
  }
}

namespace {

HeadKind head_kind_from(const json& j) {
  const auto s = j.get<std::string>();
  auto k = parse_head_kind(s);
  if (!k) throw Error("unknown head kind \"" + s + "\" (valid: Conv1D, Conv2D, BiLSTM, AttLSTM)");
  return *k;
}

}  // namespace

json to_json_value(const HeadConfig& c) {
  return {{"kind", std::string(to_string(c.kind))},
          {"filters_1d", c.filters_1d},
          {"kernel_1d", c.kernel_1d},
          {"pool_1d", c.pool_1d},
          {"filter_sizes_2d", c.filter_sizes_2d},
          {"filters_per_head", c.filters_per_head},
          {"lstm_units", c.lstm_units},
          {"lstm_units_2", c.lstm_units_2},
          {"attention_units", c.attention_units},
          {"conv_init_std", c.conv_init_std},
          {"seed", c.seed}};
}

void from_json_value(const json& j, HeadConfig& c) {
  check_keys(j,
             {"kind", "filters_1d", "kernel_1d", "pool_1d", "filter_sizes_2d", "filters_per_head", "lstm_units",
              "lstm_units_2", "attention_units", "conv_init_std", "seed"},
             "head");
  if (j.contains("kind")) c.kind = head_kind_from(j["kind"]);
  read_opt(j, "filters_1d", c.filters_1d);
  read_opt(j, "kernel_1d", c.kernel_1d);
  read_opt(j, "pool_1d", c.pool_1d);
  read_opt(j, "filter_sizes_2d", c.filter_sizes_2d);
  read_opt(j, "filters_per_head", c.filters_per_head);
  read_opt(j, "lstm_units", c.lstm_units);
  read_opt(j, "lstm_units_2", c.lstm_units_2);
  read_opt(j, "attention_units", c.attention_units);
  read_opt(j, "conv_init_std", c.conv_init_std);
  read_opt(j, "seed", c.seed);
}

json to_json_value(const FusionConfig& c) {
  return {{"dropout_rate", c.dropout_rate},
          {"hidden_units", c.hidden_units},
          {"zero_init_output", c.zero_init_output},
          {"seed", c.seed},
          {"optimizer",
           {{"learning_rate", c.optimizer.learning_rate},
            {"batch_size", c.optimizer.batch_size},
            {"max_epochs", c.optimizer.max_epochs},
            {"patience", c.optimizer.patience}}}};
}

void from_json_value(const json& j, FusionConfig& c) {
  check_keys(j, {"dropout_rate", "hidden_units", "zero_init_output", "seed", "optimizer"}, "fusion");
  read_opt(j, "dropout_rate", c.dropout_rate);
  read_opt(j, "hidden_units", c.hidden_units);
  read_opt(j, "zero_init_output", c.zero_init_output);
  read_opt(j, "seed", c.seed);
  if (auto it = j.find("optimizer"); it != j.end()) {
    check_keys(*it, {"learning_rate", "batch_size", "max_epochs", "patience"}, "fusion.optimizer");
    read_opt(*it, "learning_rate", c.optimizer.learning_rate);
    read_opt(*it, "batch_size", c.optimizer.batch_size);
    read_opt(*it, "max_epochs", c.optimizer.max_epochs);
    read_opt(*it, "patience", c.optimizer.patience);
  }
}

json to_json_value(const WalkConfig& c) {
  return {{"walks_per_node", c.walks_per_node},
          {"walk_length", c.walk_length},
          {"strategy", std::string(to_string(c.strategy))},
          {"p", c.p},
          {"q", c.q},
          {"layers", c.layers},
          {"stay_probability", c.stay_probability},
          {"seed", c.seed}};
}

void from_json_value(const json& j, WalkConfig& c) {
  check_keys(j, {"walks_per_node", "walk_length", "strategy", "p", "q", "layers", "stay_probability", "seed"},
             "walks");
  read_opt(j, "walks_per_node", c.walks_per_node);
  read_opt(j, "walk_length", c.walk_length);
  if (j.contains("strategy")) c.strategy = parse_walk_strategy(j["strategy"].get<std::string>());
  read_opt(j, "p", c.p);
  read_opt(j, "q", c.q);
  read_opt(j, "layers", c.layers);
  read_opt(j, "stay_probability", c.stay_probability);
  read_opt(j, "seed", c.seed);
}

json to_json_value(const SkipGramConfig& c) {
  return {{"dim", c.dim},
          {"window", c.window},
          {"negatives", c.negatives},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"vectors", c.vectors == NodeVectorKind::Sum ? "sum" : "input"},
          {"seed", c.seed}};
}

void from_json_value(const json& j, SkipGramConfig& c) {
  check_keys(j, {"dim", "window", "negatives", "epochs", "learning_rate", "vectors", "seed"}, "skipgram");
  read_opt(j, "dim", c.dim);
  read_opt(j, "window", c.window);
  read_opt(j, "negatives", c.negatives);
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "learning_rate", c.learning_rate);
  if (j.contains("vectors")) {
    const auto v = j["vectors"].get<std::string>();
    if (v == "sum") c.vectors = NodeVectorKind::Sum;
    else if (v == "input") c.vectors = NodeVectorKind::Input;
    else throw Error("skipgram.vectors must be \"sum\" or \"input\", got \"" + v + "\"");
  }
  read_opt(j, "seed", c.seed);
}

json to_json_value(const FrequencyOptions& c) {
  return {{"chargram_min", c.chargram_range.lo},
          {"chargram_max", c.chargram_range.hi},
          {"chargram_max_features", c.chargram_max_features},
          {"unigram_min_count", c.unigram_min_count}};
}

void from_json_value(const json& j, FrequencyOptions& c) {
  check_keys(j, {"chargram_min", "chargram_max", "chargram_max_features", "unigram_min_count"}, "frequency");
  read_opt(j, "chargram_min", c.chargram_range.lo);
  read_opt(j, "chargram_max", c.chargram_range.hi);
  read_opt(j, "chargram_max_features", c.chargram_max_features);
  read_opt(j, "unigram_min_count", c.unigram_min_count);
}

json to_json_value(const BlockSpec& s) {
  json j{{"slot", std::string(to_string(s.slot))}, {"seq_len", s.seq_len}, {"input_dim", s.input_dim}};
  j["head"] = s.head ? to_json_value(*s.head) : json(nullptr);
  return j;
}

BlockSpec block_spec_from_json(const json& j) {
  check_keys(j, {"slot", "seq_len", "input_dim", "head"}, "block spec");
  BlockSpec s;
  const auto slot = j.at("slot").get<std::string>();
  auto b = parse_fusion_block(slot);
  if (!b) throw Error("unknown fusion slot \"" + slot + "\"");
  s.slot = *b;
  s.seq_len = j.at("seq_len").get<std::size_t>();
  s.input_dim = j.at("input_dim").get<std::size_t>();
  if (j.contains("head") && !j["head"].is_null()) {
    HeadConfig h;
    from_json_value(j["head"], h);
    s.head = h;
  }
  return s;
}

}  // namespace stancelab
