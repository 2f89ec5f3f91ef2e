#include "biasbench/validation.hpp"

#include <fmt/format.h>

#include <functional>
#include <map>
#include <set>

#include "biasbench/error.hpp"

namespace biasbench {

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::SyntaxError: return "syntax_error";
    case FindingKind::DuplicateTemplate: return "duplicate_template";
    case FindingKind::EmptyBody: return "empty_body";
    case FindingKind::UndeclaredTag: return "undeclared_tag";
    case FindingKind::DuplicateTag: return "duplicate_tag";
    case FindingKind::UnknownReference: return "unknown_reference";
    case FindingKind::ForwardReference: return "forward_reference";
    case FindingKind::CyclicReference: return "cyclic_reference";
    case FindingKind::UnresolvableSlot: return "unresolvable_slot";
    case FindingKind::EmptySlot: return "empty_slot";
    case FindingKind::TooFewAnswers: return "too_few_answers";
    case FindingKind::NoBiasedChoice: return "no_biased_choice";
    case FindingKind::NoUnbiasedChoice: return "no_unbiased_choice";
    case FindingKind::DuplicateAnswerKey: return "duplicate_answer_key";
    case FindingKind::EmptyAnswer: return "empty_answer";
  }
  return "unknown";
}

namespace {

void check_tags_declared(const TemplateScenario& t, std::vector<Finding>& out) {
  std::set<std::string> reported;
  auto scan = [&](const std::string& field, const std::string& text) {
    std::vector<TagOccurrence> occs;
    try {
      occs = scan_tags(text, field);
    } catch (const ParseError& e) {
      out.push_back({t.id, FindingKind::SyntaxError, field, e.what()});
      return;
    }
    for (const TagOccurrence& occ : occs) {
      if (t.find_tag(occ.name) == nullptr && reported.insert(occ.name).second) {
        out.push_back({t.id, FindingKind::UndeclaredTag, occ.name,
                       fmt::format("tag '{}' in {} has no placeholder definition", occ.name, field)});
      }
    }
  };
  scan("body", t.body);
  for (const auto& [level, text] : t.level_components) scan(fmt::format("levels.{}", level), text);
  for (const AnswerChoice& a : t.answers) scan(fmt::format("answer {}", a.key), a.text);
}

void check_references(const TemplateScenario& t, std::vector<Finding>& out) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < t.placeholder_defs.size(); ++i) {
    const std::string& name = t.placeholder_defs[i].name;
    if (!position.emplace(name, i).second) {
      out.push_back({t.id, FindingKind::DuplicateTag, name, fmt::format("tag '{}' defined more than once", name)});
    }
  }

  // Reference graph over numeric tags; cycles are reported once per cycle entry.
  std::map<std::string, std::vector<std::string>> edges;
  for (const PlaceholderTag& tag : t.placeholder_defs) {
    if (const auto* expr = std::get_if<NumericExpr>(&tag.kind)) edges[tag.name] = expr->references();
  }
  std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::set<std::string> cyclic;
  std::function<void(const std::string&)> dfs = [&](const std::string& n) {
    state[n] = 1;
    for (const std::string& m : edges[n]) {
      if (edges.count(m) == 0) continue;
      if (state[m] == 1) {
        cyclic.insert(m);
      } else if (state[m] == 0) {
        dfs(m);
      }
    }
    state[n] = 2;
  };
  for (const auto& [name, _] : edges) {
    if (state[name] == 0) dfs(name);
  }
  for (const std::string& name : cyclic) {
    out.push_back({t.id, FindingKind::CyclicReference, name,
                   fmt::format("numeric tag '{}' is part of a reference cycle", name)});
  }

  for (std::size_t i = 0; i < t.placeholder_defs.size(); ++i) {
    const PlaceholderTag& tag = t.placeholder_defs[i];
    const auto* expr = std::get_if<NumericExpr>(&tag.kind);
    if (expr == nullptr) continue;
    for (const std::string& ref : expr->references()) {
      auto it = position.find(ref);
      if (it == position.end()) {
        out.push_back({t.id, FindingKind::UnknownReference, tag.name,
                       fmt::format("numeric tag '{}' references unknown tag '{}'", tag.name, ref)});
      } else if (it->second >= i && cyclic.count(tag.name) == 0) {
        out.push_back({t.id, FindingKind::ForwardReference, tag.name,
                       fmt::format("forward reference: numeric tag '{}' uses '{}', which is not defined earlier",
                                   tag.name, ref)});
      }
    }
  }
}

void check_slots(const TemplateScenario& t, const PhraseLexicon& lexicon, std::vector<Finding>& out) {
  for (const PlaceholderTag& tag : t.placeholder_defs) {
    const auto* slot = std::get_if<PhraseSlot>(&tag.kind);
    if (slot == nullptr) continue;
    if (!lexicon.contains(slot->slot)) {
      out.push_back({t.id, FindingKind::UnresolvableSlot, slot->slot,
                     fmt::format("slot '{}' (tag '{}') is missing from the lexicon", slot->slot, tag.name)});
    } else if (lexicon.phrases(slot->slot).empty()) {
      out.push_back({t.id, FindingKind::EmptySlot, slot->slot,
                     fmt::format("slot '{}' has no phrases", slot->slot)});
    }
  }
}

void check_answers(const TemplateScenario& t, std::vector<Finding>& out) {
  if (t.answers.size() < 2) {
    out.push_back({t.id, FindingKind::TooFewAnswers, "",
                   fmt::format("answer set has {} choice(s); at least 2 required", t.answers.size())});
  }
  bool any_biased = false;
  bool any_unbiased = false;
  std::set<std::string> keys;
  for (const AnswerChoice& a : t.answers) {
    any_biased |= a.label == AnswerLabel::Biased;
    any_unbiased |= a.label == AnswerLabel::Unbiased;
    if (a.key.empty() || !keys.insert(a.key).second) {
      out.push_back({t.id, FindingKind::DuplicateAnswerKey, a.key,
                     fmt::format("answer key '{}' is empty or repeated", a.key)});
    }
    if (a.text.empty()) {
      out.push_back({t.id, FindingKind::EmptyAnswer, a.key, fmt::format("answer '{}' has empty text", a.key)});
    }
  }
  if (!any_biased) out.push_back({t.id, FindingKind::NoBiasedChoice, "", "no biased choice"});
  if (!any_unbiased) out.push_back({t.id, FindingKind::NoUnbiasedChoice, "", "no unbiased choice"});
}

}  // namespace

std::vector<Finding> check_template(const TemplateScenario& tmpl, const PhraseLexicon* lexicon) {
  std::vector<Finding> out;
  if (tmpl.body.empty()) out.push_back({tmpl.id, FindingKind::EmptyBody, "", "template body is empty"});
  check_tags_declared(tmpl, out);
  check_references(tmpl, out);
  if (lexicon != nullptr) check_slots(tmpl, *lexicon, out);
  check_answers(tmpl, out);
  return out;
}

ValidationReport validate_corpus(const std::vector<TemplateScenario>& templates, const PhraseLexicon& lexicon) {
  ValidationReport report;
  std::set<std::string> ids;
  for (const TemplateScenario& t : templates) {
    if (!ids.insert(t.id).second) {
      report.findings.push_back({t.id, FindingKind::DuplicateTemplate, t.id, fmt::format("template id '{}' repeated", t.id)});
    }
    auto findings = check_template(t, &lexicon);
    report.findings.insert(report.findings.end(), findings.begin(), findings.end());
  }
  return report;
}

}  // namespace biasbench
