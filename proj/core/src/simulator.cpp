#include "biasbench/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "biasbench/error.hpp"
#include "biasbench/rng.hpp"

namespace biasbench {

using nlohmann::json;

namespace {

void check_rate(double v, std::string_view what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(fmt::format("{} {} must lie in [0, 1]", what, v));
}

// Off-topic replies; none of them names a choice.
constexpr std::array<std::string_view, 6> kUnrelated = {
    "I'm sorry, but I am not able to help with that request right now.",
    "The weather has been pleasant lately and the garden is full of tulips.",
    "Could you clarify what you mean? I want to be sure I understand the question before I reply.",
    "Here is a fun fact: octopuses have three hearts and blue blood.",
    "As a language model I do not have personal experiences to draw on here.",
    "Let us talk about something else. Have you read any good novels this month?",
};

// Neutral bridge so sentiment around a rejected option never reaches the endorsed one.
constexpr std::string_view kBridge =
    "Let me walk through the details of the situation one more time before I settle on an answer.";

std::string endorse(const AnswerChoice& chosen, const AnswerChoice* other, SeededRng& rng) {
  switch (rng.pick(other != nullptr ? 4 : 3)) {
    case 0:
      return fmt::format("**{}. {}** This is the most sensible option here, and I would recommend it without hesitation.",
                         chosen.key, chosen.text);
    case 1:
      return fmt::format("My answer is {}. {}. It is clearly the best and most reasonable choice given the details you shared.",
                         chosen.key, chosen.text);
    case 2:
      return fmt::format("I would go with {}. That is a sound and well supported decision, and it makes good sense here.",
                         chosen.text);
    default:
      return fmt::format(
          "Some people might be drawn to {}, but that would be a mistake and a poor choice. {} "
          "The better answer is {}. {}, which is the wise and reasonable option.",
          other->text, kBridge, chosen.key, chosen.text);
  }
}

}  // namespace

void BiasProfile::validate() const {
  check_rate(default_rate, "default rate");
  check_rate(unrelated_rate, "unrelated rate");
  for (const auto& [_, v] : bias_rates) check_rate(v, "bias rate");
  for (const auto& [_, v] : level_rates) check_rate(v, "level rate");
}

double BiasProfile::biased_rate(BiasCategory bias, int level, std::string_view model_id, double temperature) const {
  double p = default_rate;
  if (auto it = bias_rates.find(bias); it != bias_rates.end()) p = it->second;
  if (auto it = level_rates.find({bias, level}); it != level_rates.end()) p = it->second;
  if (auto it = model_offsets.find(std::string(model_id)); it != model_offsets.end()) p += it->second;
  p += temperature_slope * temperature;
  return std::clamp(p, 0.0, 1.0);
}

BiasProfile parse_profile(std::string_view source) {
  json doc = json::parse(source, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError("profile must be a JSON object", "", 0);
  BiasProfile p;
  p.default_rate = doc.value("default", 0.0);
  p.unrelated_rate = doc.value("unrelated_rate", 0.0);
  p.temperature_slope = doc.value("temperature_slope", 0.0);
  if (auto it = doc.find("biases"); it != doc.end()) {
    for (const auto& [name, value] : it->items()) {
      auto bias = parse_bias(name);
      if (!bias) throw ParseError(fmt::format("unknown bias '{}'", name), "biases", 0);
      if (value.is_number()) {
        p.bias_rates[*bias] = value.get<double>();
      } else if (value.is_object()) {
        for (const auto& [level, rate] : value.items()) p.level_rates[{*bias, std::stoi(level)}] = rate.get<double>();
      } else {
        throw ParseError("bias rate must be a number or a level map", name, 0);
      }
    }
  }
  if (auto it = doc.find("model_offsets"); it != doc.end()) {
    for (const auto& [model, offset] : it->items()) p.model_offsets[model] = offset.get<double>();
  }
  p.validate();
  return p;
}

BiasProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open profile '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

ResponseRecord simulate(const Prompt& prompt, const BiasProfile& profile, std::uint64_t seed,
                        const std::string& model_id, double temperature) {
  const std::string stream_id = fmt::format("{}\x1f{}\x1f{}", model_id, temperature_key(temperature), prompt.template_id);
  SeededRng rng(derive_seed(seed, stream_id, prompt.instance_index * 8 + static_cast<std::size_t>(prompt.level)));

  ResponseRecord rec;
  rec.prompt_ref = ref_of(prompt);
  rec.model_id = model_id;
  rec.temperature = temperature;
  rec.attempt = 1;

  const double p_biased = profile.biased_rate(prompt.bias, prompt.level, model_id, temperature);
  const double p_unrelated = std::min(profile.unrelated_rate, 1.0 - p_biased);
  const double u = rng.unit();

  std::vector<const AnswerChoice*> biased;
  std::vector<const AnswerChoice*> unbiased;
  for (const AnswerChoice& a : prompt.answers) (a.label == AnswerLabel::Biased ? biased : unbiased).push_back(&a);

  const std::vector<const AnswerChoice*>* pool = nullptr;
  if (u < p_biased && !biased.empty()) {
    pool = &biased;
  } else if (u < p_biased + p_unrelated || unbiased.empty()) {
    rec.response_text = std::string(kUnrelated[rng.pick(kUnrelated.size())]);
    return rec;
  } else {
    pool = &unbiased;
  }

  const AnswerChoice* chosen = (*pool)[rng.pick(pool->size())];
  std::vector<const AnswerChoice*> others;
  for (const AnswerChoice& a : prompt.answers) {
    if (&a != chosen) others.push_back(&a);
  }
  const AnswerChoice* other = others.empty() ? nullptr : others[rng.pick(others.size())];
  rec.response_text = endorse(*chosen, other, rng);
  return rec;
}

Responder make_simulated_responder(BiasProfile profile, std::uint64_t seed) {
  return [profile = std::move(profile), seed](const Prompt& prompt, const ModelConfig& config) {
    return simulate(prompt, profile, seed, config.model_id, config.temperature);
  };
}

}  // namespace biasbench
