#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace biasbench {

enum class BiasCategory {
  Anchoring,
  Availability,
  Confirmation,
  Framing,
  Interpretation,
  Overattribution,
  ProspectTheory,
  Representativeness,
};

inline constexpr std::array<BiasCategory, 8> kAllBiases = {
    BiasCategory::Anchoring,       BiasCategory::Availability,
    BiasCategory::Confirmation,    BiasCategory::Framing,
    BiasCategory::Interpretation,  BiasCategory::Overattribution,
    BiasCategory::ProspectTheory,  BiasCategory::Representativeness,
};

/// Snake-case identifier used in template files and reports ("prospect_theory").
std::string_view to_string(BiasCategory bias);

/// Human-readable column title ("Prospect Theory").
std::string_view display_name(BiasCategory bias);

/// Accepts the snake-case id, case-insensitively; spaces and dashes are treated as underscores.
std::optional<BiasCategory> parse_bias(std::string_view text);

}  // namespace biasbench
