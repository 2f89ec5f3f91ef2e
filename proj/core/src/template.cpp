#include "biasbench/template.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "biasbench/error.hpp"
#include "biasbench/validation.hpp"

namespace biasbench {

using nlohmann::json;

std::string_view to_string(AnswerLabel label) {
  return label == AnswerLabel::Biased ? "biased" : "unbiased";
}

std::optional<AnswerLabel> parse_answer_label(std::string_view text) {
  if (text == "biased") return AnswerLabel::Biased;
  if (text == "unbiased") return AnswerLabel::Unbiased;
  return std::nullopt;
}

const PlaceholderTag* TemplateScenario::find_tag(std::string_view name) const {
  auto it = std::find_if(placeholder_defs.begin(), placeholder_defs.end(),
                         [&](const PlaceholderTag& t) { return t.name == name; });
  return it == placeholder_defs.end() ? nullptr : &*it;
}

bool PhraseLexicon::contains(std::string_view slot) const {
  return slots_.find(std::string(slot)) != slots_.end();
}

const std::vector<std::string>& PhraseLexicon::phrases(std::string_view slot) const {
  auto it = slots_.find(std::string(slot));
  if (it == slots_.end()) throw ValidationError(fmt::format("lexicon has no slot '{}'", slot));
  return it->second;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_document(std::string_view source) {
  try {
    return json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "", e.byte > 0 ? e.byte - 1 : 0);
  }
}

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(fmt::format("missing field '{}'", key), std::string(where), 0);
  return *it;
}

std::string require_string(const json& obj, const char* key, std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(fmt::format("field '{}' must be a string", key), std::string(where), 0);
  return v.get<std::string>();
}

}  // namespace

std::vector<TagOccurrence> scan_tags(std::string_view text, std::string_view field) {
  std::vector<TagOccurrence> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '<' || i + 1 >= text.size() || !ident_start(text[i + 1])) {
      ++i;
      continue;
    }
    const std::size_t open = i;
    std::size_t j = i + 1;
    while (j < text.size() && ident_char(text[j])) ++j;
    TagOccurrence occ;
    occ.name = std::string(text.substr(i + 1, j - i - 1));
    occ.offset = open;
    while (j < text.size() && text[j] == ' ') ++j;
    if (j >= text.size()) throw ParseError("unterminated tag", std::string(field), open);
    // `<name - expr>` is read as a definition, same as `<name = expr>`.
    std::size_t op_len = 0;
    if (text[j] == '=' || text[j] == '-') {
      op_len = 1;
    } else if (text.substr(j, 3) == "\xE2\x88\x92") {
      op_len = 3;
    }
    if (op_len > 0) {
      std::size_t close = text.find('>', j + op_len);
      if (close == std::string_view::npos) throw ParseError("unterminated tag", std::string(field), open);
      std::string_view expr = text.substr(j + op_len, close - j - op_len);
      try {
        (void)parse_expression(expr);
      } catch (const ParseError& e) {
        throw ParseError(e.message(), std::string(field), j + op_len + e.position());
      }
      occ.inline_expr = std::string(expr);
      j = close;
    } else if (text[j] != '>') {
      throw ParseError(fmt::format("expected '>' or '=' in tag '{}'", occ.name), std::string(field), j);
    }
    occ.length = j + 1 - open;
    out.push_back(std::move(occ));
    i = j + 1;
  }
  return out;
}

std::string render_text(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const TagOccurrence& occ : scan_tags(text)) {
    out.append(text.substr(cursor, occ.offset - cursor));
    auto it = bindings.find(occ.name);
    if (it == bindings.end()) throw EvalError(fmt::format("no binding for tag '{}'", occ.name));
    out.append(it->second.text);
    cursor = occ.offset + occ.length;
  }
  out.append(text.substr(cursor));
  return out;
}

TemplateScenario parse_template(std::string_view source, const PhraseLexicon* lexicon, bool check) {
  json doc = parse_json_document(source);
  if (!doc.is_object()) throw ParseError("template must be a JSON object", "", 0);

  TemplateScenario t;
  t.id = require_string(doc, "id", "");
  if (t.id.empty()) throw ParseError("field 'id' must be non-empty", "id", 0);
  std::string bias = require_string(doc, "bias", "");
  auto parsed_bias = parse_bias(bias);
  if (!parsed_bias) throw ParseError(fmt::format("unknown bias category '{}'", bias), "bias", 0);
  t.bias = *parsed_bias;
  t.body = require_string(doc, "body", "");

  if (auto it = doc.find("levels"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("'levels' must be an object", "levels", 0);
    for (const auto& [key, value] : it->items()) {
      int level = 0;
      if (key.size() == 1 && key[0] >= '1' && key[0] <= '5') level = key[0] - '0';
      if (level == 0) throw ParseError(fmt::format("level key '{}' is not in 1..5", key), "levels", 0);
      if (!value.is_string()) throw ParseError("level component must be a string", "levels." + key, 0);
      t.level_components[level] = value.get<std::string>();
    }
  }

  const json& answers = require(doc, "answers", "");
  if (!answers.is_array()) throw ParseError("'answers' must be an array", "answers", 0);
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const std::string where = fmt::format("answers[{}]", i);
    const json& a = answers[i];
    if (!a.is_object()) throw ParseError("answer must be an object", where, 0);
    AnswerChoice choice;
    choice.key = require_string(a, "key", where);
    choice.text = require_string(a, "text", where);
    std::string label = require_string(a, "label", where);
    auto parsed = parse_answer_label(label);
    if (!parsed) throw ParseError(fmt::format("label '{}' must be 'biased' or 'unbiased'", label), where, 0);
    choice.label = *parsed;
    t.answers.push_back(std::move(choice));
  }

  // Declared placeholders, keyed by name, in declaration order.
  std::vector<PlaceholderTag> declared;
  if (auto it = doc.find("placeholders"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("'placeholders' must be an array", "placeholders", 0);
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = fmt::format("placeholders[{}]", i);
      const json& p = (*it)[i];
      if (!p.is_object()) throw ParseError("placeholder must be an object", where, 0);
      PlaceholderTag tag;
      tag.name = require_string(p, "name", where);
      std::string kind = require_string(p, "kind", where);
      if (kind == "phrase") {
        std::string slot = p.contains("slot") ? require_string(p, "slot", where) : tag.name;
        tag.kind = PhraseSlot{slot};
      } else if (kind == "numeric") {
        std::string expr = require_string(p, "expr", where);
        try {
          tag.kind = parse_expression(expr);
        } catch (const ParseError& e) {
          throw ParseError(e.message(), where + ".expr", e.position());
        }
      } else {
        throw ParseError(fmt::format("kind '{}' must be 'phrase' or 'numeric'", kind), where, 0);
      }
      auto dup = std::find_if(declared.begin(), declared.end(),
                              [&](const PlaceholderTag& d) { return d.name == tag.name; });
      if (dup != declared.end())
        throw ValidationError(fmt::format("template '{}': placeholder '{}' declared twice", t.id, tag.name));
      declared.push_back(std::move(tag));
    }
  }

  // Walk every text field in rendering order to fix placeholder order.
  std::vector<std::pair<std::string, const std::string*>> fields;
  fields.emplace_back("body", &t.body);
  for (const auto& [level, text] : t.level_components) fields.emplace_back(fmt::format("levels.{}", level), &text);
  for (std::size_t i = 0; i < t.answers.size(); ++i)
    fields.emplace_back(fmt::format("answers[{}].text", i), &t.answers[i].text);

  std::set<std::string> placed;
  std::set<std::string> undeclared;
  for (const auto& [field, text] : fields) {
    for (TagOccurrence& occ : scan_tags(*text, field)) {
      auto decl = std::find_if(declared.begin(), declared.end(),
                               [&](const PlaceholderTag& d) { return d.name == occ.name; });
      if (occ.inline_expr) {
        if (decl != declared.end() || placed.count(occ.name) != 0)
          throw ValidationError(fmt::format("template '{}': tag '{}' defined more than once", t.id, occ.name));
        t.placeholder_defs.push_back({occ.name, parse_expression(*occ.inline_expr)});
        placed.insert(occ.name);
        continue;
      }
      if (placed.count(occ.name) != 0) continue;
      if (decl == declared.end()) {
        undeclared.insert(occ.name);
        continue;
      }
      t.placeholder_defs.push_back(*decl);
      placed.insert(occ.name);
    }
  }
  if (!undeclared.empty()) {
    throw ValidationError(
        fmt::format("template '{}': undefined tag '{}'", t.id, *undeclared.begin()));
  }
  for (const PlaceholderTag& d : declared) {
    if (placed.count(d.name) == 0) t.placeholder_defs.push_back(d);
  }

  if (!check) return t;
  std::vector<Finding> findings = check_template(t, lexicon);
  if (!findings.empty()) {
    throw ValidationError(fmt::format("template '{}': {}", t.id, findings.front().message));
  }
  return t;
}

TemplateScenario load_template(const std::filesystem::path& path, const PhraseLexicon* lexicon, bool check) {
  return parse_template(read_file(path), lexicon, check);
}

PhraseLexicon parse_lexicon(std::string_view source) {
  json doc = parse_json_document(source);
  if (!doc.is_object()) throw ParseError("lexicon must be a JSON object", "", 0);
  std::map<std::string, std::vector<std::string>> slots;
  for (const auto& [slot, phrases] : doc.items()) {
    if (!phrases.is_array()) throw ParseError("slot must map to an array of strings", slot, 0);
    std::vector<std::string> list;
    for (const json& p : phrases) {
      if (!p.is_string()) throw ParseError("phrase must be a string", slot, 0);
      list.push_back(p.get<std::string>());
    }
    slots.emplace(slot, std::move(list));
  }
  return PhraseLexicon(std::move(slots));
}

PhraseLexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path)); }

}  // namespace biasbench
