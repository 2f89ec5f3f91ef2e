#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "biasbench/bias.hpp"
#include "biasbench/expression.hpp"

namespace biasbench {

enum class AnswerLabel { Biased, Unbiased };

std::string_view to_string(AnswerLabel label);
std::optional<AnswerLabel> parse_answer_label(std::string_view text);

struct AnswerChoice {
  std::string key;
  std::string text;
  AnswerLabel label = AnswerLabel::Unbiased;

  friend bool operator==(const AnswerChoice&, const AnswerChoice&) = default;
};

struct PhraseSlot {
  std::string slot;
};

struct PlaceholderTag {
  std::string name;
  std::variant<PhraseSlot, NumericExpr> kind;

  bool is_numeric() const { return std::holds_alternative<NumericExpr>(kind); }
};

/// Level number (1..5) to the raw component text authored for that level:
/// 1 directive, 2 context, 3 subtasks, 4 quality criteria, 5 injected facts.
using LevelComponents = std::map<int, std::string>;

struct TemplateScenario {
  std::string id;
  BiasCategory bias = BiasCategory::Anchoring;
  std::string body;
  LevelComponents level_components;
  std::vector<AnswerChoice> answers;
  /// In order of first appearance across body, levels 1..5 and answer texts;
  /// declared-but-unused tags follow in declaration order.
  std::vector<PlaceholderTag> placeholder_defs;

  const PlaceholderTag* find_tag(std::string_view name) const;
};

/// Slot name to the phrases that may fill it.
class PhraseLexicon {
 public:
  PhraseLexicon() = default;
  explicit PhraseLexicon(std::map<std::string, std::vector<std::string>> slots)
      : slots_(std::move(slots)) {}

  bool contains(std::string_view slot) const;
  /// Throws ValidationError for an unknown slot.
  const std::vector<std::string>& phrases(std::string_view slot) const;
  const std::map<std::string, std::vector<std::string>>& slots() const { return slots_; }

 private:
  std::map<std::string, std::vector<std::string>> slots_;
};

/// One `<...>` occurrence in a text field.
struct TagOccurrence {
  std::string name;
  std::size_t offset = 0;  // byte offset of '<'
  std::size_t length = 0;  // through the closing '>'
  std::optional<std::string> inline_expr;  // set for `<name = expr>` and `<name - expr>`
};

/// Finds every tag in `text`. A '<' followed by a letter or underscore opens a
/// tag; any other '<' is literal. Throws ParseError (offset into `text`) for a
/// malformed tag.
std::vector<TagOccurrence> scan_tags(std::string_view text, std::string_view field = "");

/// Replaces each tag with its bound text. Throws EvalError for a missing binding.
std::string render_text(std::string_view text, const Bindings& bindings);

/// Parses one template document (JSON). When `lexicon` is given, phrase slots
/// are checked against it. Throws ParseError for syntax problems and
/// ValidationError for the first broken invariant. With `check` false only
/// tag declaration problems raise; check_template reports the rest.
TemplateScenario parse_template(std::string_view source, const PhraseLexicon* lexicon = nullptr, bool check = true);

TemplateScenario load_template(const std::filesystem::path& path, const PhraseLexicon* lexicon = nullptr,
                               bool check = true);

/// Lexicon document: a JSON object mapping slot name to a list of phrases.
PhraseLexicon parse_lexicon(std::string_view source);
PhraseLexicon load_lexicon(const std::filesystem::path& path);

}  // namespace biasbench
