#include "biasbench/prompt.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "biasbench/error.hpp"

namespace biasbench {

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Directive: return "directive";
    case ComponentKind::Context: return "context";
    case ComponentKind::Subtasks: return "subtasks";
    case ComponentKind::QualityCriteria: return "quality_criteria";
    case ComponentKind::InjectedFacts: return "injected_facts";
    case ComponentKind::AnswerBlock: return "answer_block";
  }
  return "unknown";
}

const LevelRecipe& recipe_for(int level) {
  using K = ComponentKind;
  static const std::array<LevelRecipe, 5> recipes = {{
      {1, {K::Directive, K::AnswerBlock}},
      {2, {K::Directive, K::Context, K::AnswerBlock}},
      {3, {K::Directive, K::Context, K::Subtasks, K::AnswerBlock}},
      {4, {K::Directive, K::Context, K::Subtasks, K::QualityCriteria, K::AnswerBlock}},
      {5, {K::Directive, K::Context, K::Subtasks, K::QualityCriteria, K::InjectedFacts, K::AnswerBlock}},
  }};
  if (level < kMinLevel || level > kMaxLevel)
    throw ValidationError(fmt::format("prompt level {} is outside {}..{}", level, kMinLevel, kMaxLevel));
  return recipes[static_cast<std::size_t>(level - 1)];
}

std::vector<std::string> Prompt::answer_keys() const {
  std::vector<std::string> keys;
  keys.reserve(answers.size());
  for (const auto& a : answers) keys.push_back(a.key);
  return keys;
}

std::string format_answer_block(const std::vector<AnswerChoice>& answers) {
  std::string out = "Options:";
  for (const AnswerChoice& a : answers) out += fmt::format("\n{}. {}", a.key, a.text);
  return out;
}

namespace {

std::string component_text(const ScenarioInstance& inst, ComponentKind kind, int level) {
  auto level_text = [&](int n) -> std::string {
    auto it = inst.resolved_level_components.find(n);
    return it == inst.resolved_level_components.end() ? std::string() : it->second;
  };
  auto require = [&](int n, std::string_view heading) {
    std::string text = level_text(n);
    if (text.empty()) {
      throw ValidationError(fmt::format("instance {}#{} has no {} component required by level {}",
                                        inst.template_id, inst.instance_index, to_string(kind), level));
    }
    return heading.empty() ? text : fmt::format("{}\n{}", heading, text);
  };
  switch (kind) {
    case ComponentKind::Directive: {
      if (inst.resolved_body.empty()) {
        throw ValidationError(
            fmt::format("instance {}#{} has an empty scenario body", inst.template_id, inst.instance_index));
      }
      std::string ask = level_text(1);
      return ask.empty() ? inst.resolved_body : fmt::format("{}\n\n{}", inst.resolved_body, ask);
    }
    case ComponentKind::Context: return require(2, "Context:");
    case ComponentKind::Subtasks: return require(3, "Steps to consider:");
    case ComponentKind::QualityCriteria: return require(4, "A good answer:");
    case ComponentKind::InjectedFacts: return require(5, "Relevant facts:");
    case ComponentKind::AnswerBlock: return format_answer_block(inst.resolved_answers);
  }
  return {};
}

}  // namespace

Prompt build_prompt(const ScenarioInstance& instance, int level) {
  const LevelRecipe& recipe = recipe_for(level);
  Prompt p;
  p.template_id = instance.template_id;
  p.instance_index = instance.instance_index;
  p.level = level;
  p.bias = instance.bias;
  p.answers = instance.resolved_answers;
  for (std::size_t i = 0; i < recipe.included_components.size(); ++i) {
    if (i > 0) p.text += "\n\n";
    p.text += component_text(instance, recipe.included_components[i], level);
  }
  return p;
}

std::vector<Prompt> expand_prompt_set(const std::vector<ScenarioInstance>& instances) {
  std::vector<const ScenarioInstance*> order;
  order.reserve(instances.size());
  for (const auto& inst : instances) order.push_back(&inst);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
    return std::tie(a->template_id, a->instance_index) < std::tie(b->template_id, b->instance_index);
  });
  std::vector<Prompt> out;
  out.reserve(instances.size() * kMaxLevel);
  for (const ScenarioInstance* inst : order) {
    for (int level = kMinLevel; level <= kMaxLevel; ++level) out.push_back(build_prompt(*inst, level));
  }
  return out;
}

}  // namespace biasbench
