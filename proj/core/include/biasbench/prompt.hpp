#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "biasbench/filler.hpp"

namespace biasbench {

enum class ComponentKind { Directive, Context, Subtasks, QualityCriteria, InjectedFacts, AnswerBlock };

std::string_view to_string(ComponentKind kind);

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

/// Components rendered at one detail level, in output order.
struct LevelRecipe {
  int level;
  std::vector<ComponentKind> included_components;
};

/// Cumulative recipe: level 1 is the directive, each level adds one
/// component (context, subtasks, quality criteria, injected facts), and
/// every level ends with the answer block.
const LevelRecipe& recipe_for(int level);

/// One detail-level rendering of a scenario instance.
struct Prompt {
  std::string template_id;
  std::size_t instance_index = 0;
  int level = kMinLevel;
  BiasCategory bias = BiasCategory::Anchoring;
  std::string text;
  std::vector<AnswerChoice> answers;

  std::vector<std::string> answer_keys() const;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// "Options:" followed by one "<key>. <text>" line per choice.
std::string format_answer_block(const std::vector<AnswerChoice>& answers);

/// Throws ValidationError when `level` is outside 1..5 or the instance lacks
/// a component the level needs.
Prompt build_prompt(const ScenarioInstance& instance, int level);

/// All five levels of every instance, ordered by (template_id, instance_index, level).
std::vector<Prompt> expand_prompt_set(const std::vector<ScenarioInstance>& instances);

}  // namespace biasbench
