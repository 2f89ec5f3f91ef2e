#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "biasbench/gateway.hpp"

namespace biasbench {

/// Ground-truth behaviour of the simulated provider.
struct BiasProfile {
  /// Biased-response probability when nothing more specific is set.
  double default_rate = 0.0;
  std::map<BiasCategory, double> bias_rates;
  /// Per-(bias, level) overrides; take precedence over bias_rates.
  std::map<std::pair<BiasCategory, int>, double> level_rates;
  /// Probability of an off-topic response that mentions no choice.
  double unrelated_rate = 0.0;
  /// Added to the biased probability per unit of temperature.
  double temperature_slope = 0.0;
  /// Added to the biased probability for a given model id.
  std::map<std::string, double> model_offsets;

  /// Throws ValidationError when a rate lies outside [0, 1].
  void validate() const;

  /// Biased probability for one prompt, clamped to [0, 1].
  double biased_rate(BiasCategory bias, int level, std::string_view model_id, double temperature) const;
};

/// JSON document:
///   {"default": 0.3, "unrelated_rate": 0.05,
///    "biases": {"anchoring": 0.1, "framing": {"1": 0.6, "5": 0.2}},
///    "temperature_slope": 0.0, "model_offsets": {"sim-a": 0.05}}
BiasProfile parse_profile(std::string_view source);
BiasProfile load_profile(const std::filesystem::path& path);

/// Deterministic stand-in for a chat model. With the profile's biased rate
/// the response endorses a biased choice, with the unrelated rate (taken out
/// of the remaining mass) it talks about something else, and otherwise it
/// endorses an unbiased choice. Phrasing varies between key-first, text-only
/// and contrastive forms that name and reject another choice.
ResponseRecord simulate(const Prompt& prompt, const BiasProfile& profile, std::uint64_t seed,
                        const std::string& model_id = "simulated", double temperature = 0.0);

/// Responder that calls simulate() with the config's model id and temperature.
Responder make_simulated_responder(BiasProfile profile, std::uint64_t seed);

}  // namespace biasbench
