#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biasbench/gateway.hpp"
#include "biasbench/stats.hpp"

namespace biasbench {

/// A model under test. `config.temperature` is ignored; the manifest's
/// temperature list supplies it.
struct ModelSpec {
  ModelConfig config;
  ModelTraits traits;
};

/// Single source of truth for a run. Relative paths resolve against the
/// manifest file's directory.
struct RunManifest {
  std::filesystem::path corpus_dir;
  std::filesystem::path lexicon;
  std::uint64_t base_seed = 0;
  std::size_t k = 25;
  std::vector<ModelSpec> models;
  std::vector<double> temperatures{0.2};
  std::filesystem::path extraction_config;
  std::filesystem::path output_dir;
  std::size_t parallelism = 4;
  bool simulate = false;
  std::filesystem::path profile;
  std::uint64_t simulate_seed = 0;
  /// Long-form report groupings written by the score stage.
  std::vector<std::string> score_groupings{"model,bias", "model,bias,level"};

  /// Throws ValidationError for a broken invariant or a missing file.
  void validate() const;

  /// One config per (model, temperature), models in manifest order.
  std::vector<ModelConfig> run_configs() const;

  std::map<std::string, ModelTraits> traits() const;
};

/// `base_dir` anchors relative paths. Throws ParseError for malformed JSON or
/// a field of the wrong type.
RunManifest parse_manifest(std::string_view source, const std::filesystem::path& base_dir);

/// Parses and validates.
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace biasbench
