#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace stancelab {

// Canonical class order; also the argmax tie-break order.
enum class StanceLabel : int { Against = 0, Favor = 1, None = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<StanceLabel, 3> kAllLabels{
    StanceLabel::Against, StanceLabel::Favor, StanceLabel::None};

constexpr std::string_view to_string(StanceLabel l) {
  switch (l) {
    case StanceLabel::Against: return "AGAINST";
    case StanceLabel::Favor: return "FAVOR";
    case StanceLabel::None: return "NONE";
  }
  return "NONE";
}

constexpr std::optional<StanceLabel> parse_label(std::string_view s) {
  if (s == "AGAINST") return StanceLabel::Against;
  if (s == "FAVOR") return StanceLabel::Favor;
  if (s == "NONE") return StanceLabel::None;
  return std::nullopt;
}

constexpr int index_of(StanceLabel l) { return static_cast<int>(l); }

}  // namespace stancelab
