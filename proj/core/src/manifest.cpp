#include "biasbench/manifest.hpp"

#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "biasbench/error.hpp"

namespace biasbench {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T get_as(const json& obj, const char* key, std::string_view where, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("field '{}' has the wrong type", key), std::string(where), 0);
  }
}

ModelSpec parse_model(const json& m, const std::string& where) {
  if (!m.is_object()) throw ParseError("model entry must be an object", where, 0);
  ModelSpec spec;
  ModelConfig& c = spec.config;
  c.model_id = get_as<std::string>(m, "id", where, "");
  if (c.model_id.empty()) throw ParseError("missing field 'id'", where, 0);
  c.endpoint = get_as<std::string>(m, "endpoint", where, "");
  c.top_p = get_as<double>(m, "top_p", where, c.top_p);
  c.top_k = get_as<int>(m, "top_k", where, c.top_k);
  c.max_tokens = get_as<int>(m, "max_tokens", where, c.max_tokens);
  c.request_timeout = Millis(get_as<long long>(m, "timeout_ms", where, c.request_timeout.count()));
  c.api_key_env = get_as<std::string>(m, "api_key_env", where, c.api_key_env);
  c.rate_limit = get_as<double>(m, "rate_limit", where, c.rate_limit);
  c.retry.max_attempts = get_as<int>(m, "max_attempts", where, c.retry.max_attempts);
  c.retry.initial_backoff = Millis(get_as<long long>(m, "backoff_ms", where, c.retry.initial_backoff.count()));
  if (auto it = m.find("params_b"); it != m.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError("field 'params_b' must be a number", where, 0);
    spec.traits.params_billions = it->get<double>();
  }
  if (auto it = m.find("reasoning"); it != m.end() && !it->is_null()) {
    if (!it->is_boolean()) throw ParseError("field 'reasoning' must be a boolean", where, 0);
    spec.traits.reasoning = it->get<bool>();
  }
  return spec;
}

}  // namespace

RunManifest parse_manifest(std::string_view source, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "manifest", e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object()) throw ParseError("manifest must be a JSON object", "manifest", 0);

  RunManifest m;
  const std::string where = "manifest";
  auto path_field = [&](const char* key, bool required) -> std::filesystem::path {
    std::string p = get_as<std::string>(doc, key, where, "");
    if (p.empty()) {
      if (required) throw ParseError(fmt::format("missing field '{}'", key), where, 0);
      return {};
    }
    return resolve(base_dir, p);
  };
  m.corpus_dir = path_field("corpus", true);
  m.lexicon = path_field("lexicon", true);
  m.extraction_config = path_field("extraction", true);
  m.output_dir = path_field("output", true);
  m.base_seed = get_as<std::uint64_t>(doc, "base_seed", where, m.base_seed);
  const long long k = get_as<long long>(doc, "k", where, static_cast<long long>(m.k));
  if (k < 1) throw ValidationError(fmt::format("k must be at least 1 (got {})", k));
  m.k = static_cast<std::size_t>(k);
  m.parallelism = get_as<std::size_t>(doc, "parallelism", where, m.parallelism);
  m.temperatures = get_as<std::vector<double>>(doc, "temperatures", where, m.temperatures);
  m.score_groupings = get_as<std::vector<std::string>>(doc, "score_groupings", where, m.score_groupings);

  if (auto it = doc.find("models"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("field 'models' must be an array", where, 0);
    for (std::size_t i = 0; i < it->size(); ++i) m.models.push_back(parse_model((*it)[i], fmt::format("models[{}]", i)));
  }
  if (auto it = doc.find("simulate"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("field 'simulate' must be an object", where, 0);
    m.simulate = get_as<bool>(*it, "enabled", "simulate", true);
    std::string profile = get_as<std::string>(*it, "profile", "simulate", "");
    if (!profile.empty()) m.profile = resolve(base_dir, profile);
    m.simulate_seed = get_as<std::uint64_t>(*it, "seed", "simulate", m.simulate_seed);
  }
  return m;
}

void RunManifest::validate() const {
  auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) throw ValidationError(fmt::format("{} '{}' does not exist", what, p.string()));
  };
  must_exist(corpus_dir, "corpus directory");
  must_exist(lexicon, "lexicon");
  must_exist(extraction_config, "extraction config");
  if (k < 1) throw ValidationError("k must be at least 1");
  if (parallelism < 1) throw ValidationError("parallelism must be at least 1");
  if (temperatures.empty()) throw ValidationError("at least one temperature is required");
  for (double t : temperatures) {
    if (!(t >= 0.0 && t <= 2.0)) throw ValidationError(fmt::format("temperature {} outside [0, 2]", t));
  }
  if (models.empty() && !simulate) throw ValidationError("manifest needs at least one model or simulate");
  std::set<std::string> ids;
  for (const ModelSpec& spec : models) {
    if (!ids.insert(spec.config.model_id).second)
      throw ValidationError(fmt::format("model '{}' listed twice", spec.config.model_id));
    if (!simulate && spec.config.endpoint.empty())
      throw ValidationError(fmt::format("model '{}' has no endpoint", spec.config.model_id));
  }
  if (simulate) {
    if (profile.empty()) throw ValidationError("simulate requires a profile");
    must_exist(profile, "simulation profile");
  }
  for (const std::string& g : score_groupings) {
    if (GroupBy::parse(g).mask == 0) throw ValidationError("empty score grouping");
  }
}

std::vector<ModelConfig> RunManifest::run_configs() const {
  std::vector<ModelSpec> specs = models;
  if (specs.empty()) {
    ModelSpec sim;
    sim.config.model_id = "simulated";
    specs.push_back(sim);
  }
  std::vector<ModelConfig> out;
  for (const ModelSpec& spec : specs) {
    for (double t : temperatures) {
      ModelConfig c = spec.config;
      c.temperature = t;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::map<std::string, ModelTraits> RunManifest::traits() const {
  std::map<std::string, ModelTraits> out;
  for (const ModelSpec& spec : models) out[spec.config.model_id] = spec.traits;
  return out;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open manifest '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  RunManifest m = parse_manifest(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  m.validate();
  return m;
}

}  // namespace biasbench
