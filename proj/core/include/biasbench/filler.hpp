#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biasbench/template.hpp"

namespace biasbench {

/// A template with every placeholder resolved.
struct ScenarioInstance {
  std::string template_id;
  BiasCategory bias = BiasCategory::Anchoring;
  std::size_t instance_index = 0;
  Bindings bindings;
  std::string resolved_body;
  LevelComponents resolved_level_components;
  std::vector<AnswerChoice> resolved_answers;
  /// Seed of the accepted draw; draw_bindings(template, lexicon, seed)
  /// reproduces `bindings` exactly.
  std::uint64_t seed = 0;
  /// Set when no unused binding tuple was found within the retry budget.
  bool duplicate = false;

  friend bool operator==(const ScenarioInstance&, const ScenarioInstance&) = default;
};

struct FillOptions {
  /// Draws per instance before a repeated binding tuple is accepted.
  int max_attempts = 64;
};

/// Resolves every placeholder of `tmpl` in placeholder order using one
/// stream seeded with `seed`. Phrases are drawn uniformly from their slot.
Bindings draw_bindings(const TemplateScenario& tmpl, const PhraseLexicon& lexicon, std::uint64_t seed);

/// Expands one template into exactly `k` instances. Instance i is drawn from
/// derive_seed(base_seed, template id, i); a draw whose binding tuple repeats
/// an earlier instance is retried with a fresh child seed.
/// Throws ValidationError for a lexicon gap or k == 0, EvalError (naming the
/// instance) when an expression fails.
std::vector<ScenarioInstance> fill_template(const TemplateScenario& tmpl, const PhraseLexicon& lexicon,
                                            std::uint64_t base_seed, std::size_t k,
                                            const FillOptions& options = {});

/// fill_template over a corpus, sorted by (template_id, instance_index).
std::vector<ScenarioInstance> fill_corpus(const std::vector<TemplateScenario>& templates,
                                          const PhraseLexicon& lexicon, std::uint64_t base_seed, std::size_t k,
                                          const FillOptions& options = {});

}  // namespace biasbench
