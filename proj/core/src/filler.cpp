#include "biasbench/filler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "biasbench/error.hpp"
#include "biasbench/rng.hpp"

namespace biasbench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string binding_key(const Bindings& b) {
  std::string key;
  for (const auto& [name, value] : b) {
    key += name;
    key += '\x1f';
    key += value.text;
    key += '\x1e';
  }
  return key;
}

ScenarioInstance render_instance(const TemplateScenario& tmpl, std::size_t index, Bindings bindings,
                                 std::uint64_t seed) {
  ScenarioInstance inst;
  inst.template_id = tmpl.id;
  inst.bias = tmpl.bias;
  inst.instance_index = index;
  inst.resolved_body = render_text(tmpl.body, bindings);
  for (const auto& [level, text] : tmpl.level_components)
    inst.resolved_level_components[level] = render_text(text, bindings);
  for (const AnswerChoice& a : tmpl.answers) inst.resolved_answers.push_back({a.key, render_text(a.text, bindings), a.label});
  inst.bindings = std::move(bindings);
  inst.seed = seed;
  return inst;
}

}  // namespace

Bindings draw_bindings(const TemplateScenario& tmpl, const PhraseLexicon& lexicon, std::uint64_t seed) {
  SeededRng rng(seed);
  Bindings bindings;
  for (const PlaceholderTag& tag : tmpl.placeholder_defs) {
    BoundValue value = std::visit(
        overloaded{
            [&](const PhraseSlot& slot) {
              const auto& phrases = lexicon.phrases(slot.slot);
              if (phrases.empty()) throw ValidationError(fmt::format("slot '{}' has no phrases", slot.slot));
              return BoundValue{phrases[rng.pick(phrases.size())], std::nullopt};
            },
            [&](const NumericExpr& expr) {
              double v = eval_expression(expr, bindings, rng);
              return BoundValue{format_number(v), v};
            },
        },
        tag.kind);
    bindings.emplace(tag.name, std::move(value));
  }
  return bindings;
}

std::vector<ScenarioInstance> fill_template(const TemplateScenario& tmpl, const PhraseLexicon& lexicon,
                                            std::uint64_t base_seed, std::size_t k, const FillOptions& options) {
  if (k == 0) throw ValidationError("k must be at least 1");
  for (const PlaceholderTag& tag : tmpl.placeholder_defs) {
    if (const auto* slot = std::get_if<PhraseSlot>(&tag.kind); slot && !lexicon.contains(slot->slot)) {
      throw ValidationError(
          fmt::format("template '{}': lexicon has no slot '{}' for tag '{}'", tmpl.id, slot->slot, tag.name));
    }
  }

  const int attempts = std::max(1, options.max_attempts);
  std::vector<ScenarioInstance> out;
  out.reserve(k);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t child = derive_seed(base_seed, tmpl.id, i);
    Bindings bindings;
    std::uint64_t seed = child;
    bool duplicate = true;
    try {
      for (int attempt = 0; attempt < attempts; ++attempt) {
        seed = attempt == 0 ? child : derive_seed(child, "retry", static_cast<std::uint64_t>(attempt));
        bindings = draw_bindings(tmpl, lexicon, seed);
        if (seen.insert(binding_key(bindings)).second) {
          duplicate = false;
          break;
        }
        if (tmpl.placeholder_defs.empty()) break;
      }
    } catch (const EvalError& e) {
      throw EvalError(fmt::format("template '{}' instance {}: {}", tmpl.id, i, e.what()));
    }
    ScenarioInstance inst = render_instance(tmpl, i, std::move(bindings), seed);
    inst.duplicate = duplicate && !tmpl.placeholder_defs.empty();
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<ScenarioInstance> fill_corpus(const std::vector<TemplateScenario>& templates,
                                          const PhraseLexicon& lexicon, std::uint64_t base_seed, std::size_t k,
                                          const FillOptions& options) {
  std::vector<const TemplateScenario*> order;
  for (const auto& t : templates) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<ScenarioInstance> out;
  out.reserve(templates.size() * k);
  for (const TemplateScenario* t : order) {
    auto part = fill_template(*t, lexicon, base_seed, k, options);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace biasbench
