#include "biasbench/bias.hpp"

#include <algorithm>
#include <cctype>

namespace biasbench {

std::string_view to_string(BiasCategory bias) {
  switch (bias) {
    case BiasCategory::Anchoring: return "anchoring";
    case BiasCategory::Availability: return "availability";
    case BiasCategory::Confirmation: return "confirmation";
    case BiasCategory::Framing: return "framing";
    case BiasCategory::Interpretation: return "interpretation";
    case BiasCategory::Overattribution: return "overattribution";
    case BiasCategory::ProspectTheory: return "prospect_theory";
    case BiasCategory::Representativeness: return "representativeness";
  }
  return "unknown";
}

std::string_view display_name(BiasCategory bias) {
  switch (bias) {
    case BiasCategory::Anchoring: return "Anchoring";
    case BiasCategory::Availability: return "Availability";
    case BiasCategory::Confirmation: return "Confirmation";
    case BiasCategory::Framing: return "Framing";
    case BiasCategory::Interpretation: return "Interpretation";
    case BiasCategory::Overattribution: return "Overattribution";
    case BiasCategory::ProspectTheory: return "Prospect Theory";
    case BiasCategory::Representativeness: return "Representativeness";
  }
  return "Unknown";
}

std::optional<BiasCategory> parse_bias(std::string_view text) {
  std::string norm;
  norm.reserve(text.size());
  for (char c : text) {
    if (c == ' ' || c == '-') {
      norm.push_back('_');
    } else {
      norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  auto it = std::find_if(kAllBiases.begin(), kAllBiases.end(),
                         [&](BiasCategory b) { return to_string(b) == norm; });
  if (it == kAllBiases.end()) return std::nullopt;
  return *it;
}

}  // namespace biasbench
