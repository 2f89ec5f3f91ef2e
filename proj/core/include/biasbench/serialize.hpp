#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "biasbench/extraction.hpp"
#include "biasbench/filler.hpp"
#include "biasbench/gateway.hpp"
#include "biasbench/prompt.hpp"
#include "biasbench/scoring.hpp"

namespace biasbench {

nlohmann::json to_json(const AnswerChoice& choice);
AnswerChoice answer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioInstance& instance);
ScenarioInstance instance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Prompt& prompt);
Prompt prompt_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ResponseRecord& record);
ResponseRecord response_from_json(const nlohmann::json& j);

/// One extracted response: provenance, per-choice intermediate scores and the outcome.
struct ExtractionRecord {
  PromptRef prompt_ref;
  BiasCategory bias = BiasCategory::Anchoring;
  std::string model_id;
  double temperature = 0.0;
  AnswerScores scores;
  Outcome outcome = Outcome::Unrelated;
};

nlohmann::json to_json(const ExtractionRecord& record);
ExtractionRecord extraction_from_json(const nlohmann::json& j);

/// Writes one compact JSON document per line.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

/// Calls `fn` for each non-empty line. Throws ParseError naming the line on
/// bad JSON, unless `skip_partial` is set: then lines left half-written by an
/// interrupted append are skipped.
void read_jsonl(const std::filesystem::path& path, const std::function<void(const nlohmann::json&)>& fn,
                bool skip_partial = false);

}  // namespace biasbench
