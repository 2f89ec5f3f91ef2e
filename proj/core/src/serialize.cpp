#include "biasbench/serialize.hpp"

#include <fmt/format.h>

#include <fstream>

#include "biasbench/error.hpp"

namespace biasbench {

using nlohmann::json;

namespace {

BiasCategory bias_from(const json& j) {
  auto b = parse_bias(j.get<std::string>());
  if (!b) throw ParseError(fmt::format("unknown bias '{}'", j.get<std::string>()), "bias", 0);
  return *b;
}

json to_json(const PromptRef& ref) {
  return {{"template_id", ref.template_id}, {"instance_index", ref.instance_index}, {"level", ref.level}};
}

PromptRef ref_from(const json& j) {
  return {j.at("template_id").get<std::string>(), j.at("instance_index").get<std::size_t>(), j.at("level").get<int>()};
}

}  // namespace

json to_json(const AnswerChoice& choice) {
  return {{"key", choice.key}, {"text", choice.text}, {"label", std::string(to_string(choice.label))}};
}

AnswerChoice answer_from_json(const json& j) {
  AnswerChoice a;
  a.key = j.at("key").get<std::string>();
  a.text = j.at("text").get<std::string>();
  auto label = parse_answer_label(j.at("label").get<std::string>());
  if (!label) throw ParseError("bad answer label", "label", 0);
  a.label = *label;
  return a;
}

json to_json(const ScenarioInstance& inst) {
  json bindings = json::object();
  for (const auto& [name, value] : inst.bindings) {
    json v = {{"text", value.text}};
    if (value.number) v["number"] = *value.number;
    bindings[name] = std::move(v);
  }
  json levels = json::object();
  for (const auto& [level, text] : inst.resolved_level_components) levels[std::to_string(level)] = text;
  json answers = json::array();
  for (const auto& a : inst.resolved_answers) answers.push_back(to_json(a));
  return {{"template_id", inst.template_id},
          {"bias", std::string(to_string(inst.bias))},
          {"instance_index", inst.instance_index},
          {"seed", inst.seed},
          {"duplicate", inst.duplicate},
          {"bindings", std::move(bindings)},
          {"body", inst.resolved_body},
          {"levels", std::move(levels)},
          {"answers", std::move(answers)}};
}

ScenarioInstance instance_from_json(const json& j) {
  ScenarioInstance inst;
  inst.template_id = j.at("template_id").get<std::string>();
  inst.bias = bias_from(j.at("bias"));
  inst.instance_index = j.at("instance_index").get<std::size_t>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.duplicate = j.value("duplicate", false);
  for (const auto& [name, v] : j.at("bindings").items()) {
    BoundValue bv{v.at("text").get<std::string>(), std::nullopt};
    if (v.contains("number")) bv.number = v.at("number").get<double>();
    inst.bindings.emplace(name, std::move(bv));
  }
  inst.resolved_body = j.at("body").get<std::string>();
  for (const auto& [level, text] : j.at("levels").items()) inst.resolved_level_components[std::stoi(level)] = text.get<std::string>();
  for (const auto& a : j.at("answers")) inst.resolved_answers.push_back(answer_from_json(a));
  return inst;
}

json to_json(const Prompt& p) {
  json answers = json::array();
  for (const auto& a : p.answers) answers.push_back(to_json(a));
  return {{"template_id", p.template_id}, {"instance_index", p.instance_index},
          {"level", p.level},             {"bias", std::string(to_string(p.bias))},
          {"text", p.text},               {"answers", std::move(answers)}};
}

Prompt prompt_from_json(const json& j) {
  Prompt p;
  p.template_id = j.at("template_id").get<std::string>();
  p.instance_index = j.at("instance_index").get<std::size_t>();
  p.level = j.at("level").get<int>();
  p.bias = bias_from(j.at("bias"));
  p.text = j.at("text").get<std::string>();
  for (const auto& a : j.at("answers")) p.answers.push_back(answer_from_json(a));
  return p;
}

json to_json(const ResponseRecord& r) {
  json out = {{"prompt", to_json(r.prompt_ref)},
              {"model_id", r.model_id},
              {"temperature", r.temperature},
              {"response_text", r.response_text},
              {"latency_ms", r.latency.count()},
              {"attempt", r.attempt},
              {"timestamp", r.timestamp},
              {"error", std::string(to_string(r.error))}};
  if (!r.error_message.empty()) out["error_message"] = r.error_message;
  return out;
}

ResponseRecord response_from_json(const json& j) {
  ResponseRecord r;
  r.prompt_ref = ref_from(j.at("prompt"));
  r.model_id = j.at("model_id").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.response_text = j.at("response_text").get<std::string>();
  r.latency = Millis{j.value("latency_ms", 0)};
  r.attempt = j.value("attempt", 0);
  r.timestamp = j.value("timestamp", "");
  auto err = parse_response_error(j.value("error", "none"));
  if (!err) throw ParseError("bad error kind", "error", 0);
  r.error = *err;
  r.error_message = j.value("error_message", "");
  return r;
}

json to_json(const ExtractionRecord& r) {
  json choices = json::array();
  for (const ChoiceScore& c : r.scores.choices) {
    json row = {{"key", c.key},
                {"score_p", c.score_p},
                {"avg_score", c.avg_score},
                {"max_score", c.max_score},
                {"weight_s", c.weight_s},
                {"confidence", c.confidence},
                {"pass", c.pass == MatchPass::KeyLine ? "key_line" : "bare_text"},
                {"n_matches", c.matches.size()}};
    if (auto off = c.first_match_offset()) row["first_match_offset"] = *off;
    choices.push_back(std::move(row));
  }
  return {{"prompt", to_json(r.prompt_ref)},
          {"bias", std::string(to_string(r.bias))},
          {"model_id", r.model_id},
          {"temperature", r.temperature},
          {"selected", r.scores.selected ? json(*r.scores.selected) : json(nullptr)},
          {"outcome", std::string(to_string(r.outcome))},
          {"choices", std::move(choices)}};
}

ExtractionRecord extraction_from_json(const json& j) {
  ExtractionRecord r;
  r.prompt_ref = ref_from(j.at("prompt"));
  r.bias = bias_from(j.at("bias"));
  r.model_id = j.at("model_id").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  if (!j.at("selected").is_null()) r.scores.selected = j.at("selected").get<std::string>();
  auto outcome = parse_outcome(j.at("outcome").get<std::string>());
  if (!outcome) throw ParseError("bad outcome", "outcome", 0);
  r.outcome = *outcome;
  for (const auto& c : j.at("choices")) {
    ChoiceScore cs;
    cs.key = c.at("key").get<std::string>();
    cs.score_p = c.at("score_p").get<double>();
    cs.avg_score = c.at("avg_score").get<double>();
    cs.max_score = c.at("max_score").get<double>();
    cs.weight_s = c.at("weight_s").get<double>();
    cs.confidence = c.at("confidence").get<double>();
    cs.pass = c.at("pass").get<std::string>() == "key_line" ? MatchPass::KeyLine : MatchPass::BareText;
    r.scores.choices.push_back(std::move(cs));
  }
  return r;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  for (const json& row : rows) out << row.dump() << '\n';
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

void read_jsonl(const std::filesystem::path& path, const std::function<void(const json&)>& fn, bool skip_partial) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() && skip_partial) continue;
    if (doc.is_discarded()) throw ParseError("invalid JSON line", fmt::format("{}:{}", path.string(), lineno), 0);
    fn(doc);
  }
}

}  // namespace biasbench
