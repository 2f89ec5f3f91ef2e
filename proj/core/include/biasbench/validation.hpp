#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "biasbench/template.hpp"

namespace biasbench {

enum class FindingKind {
  SyntaxError,
  DuplicateTemplate,
  EmptyBody,
  UndeclaredTag,
  DuplicateTag,
  UnknownReference,
  ForwardReference,
  CyclicReference,
  UnresolvableSlot,
  EmptySlot,
  TooFewAnswers,
  NoBiasedChoice,
  NoUnbiasedChoice,
  DuplicateAnswerKey,
  EmptyAnswer,
};

std::string_view to_string(FindingKind kind);

struct Finding {
  std::string template_id;
  FindingKind kind;
  std::string subject;  // tag, slot, key or file the finding is about
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }
  std::size_t size() const { return findings.size(); }
};

/// Every broken invariant of one template. Lexicon checks are skipped when
/// `lexicon` is null.
std::vector<Finding> check_template(const TemplateScenario& tmpl, const PhraseLexicon* lexicon);

/// Findings for the whole corpus, in template order. An empty report means
/// every template can be expanded with this lexicon.
ValidationReport validate_corpus(const std::vector<TemplateScenario>& templates,
                                 const PhraseLexicon& lexicon);

}  // namespace biasbench
