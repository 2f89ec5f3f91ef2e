#include "biasbench/extraction.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "biasbench/error.hpp"
#include "biasbench/similarity.hpp"

namespace biasbench {

void ExtractionConfig::validate() const {
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0))
    throw ValidationError(fmt::format("similarity threshold {} must lie in (0, 1]", similarity_threshold));
  if (avg_weight < 0.0 || max_weight < 0.0 || std::abs(avg_weight + max_weight - 1.0) > 1e-12)
    throw ValidationError(fmt::format("presence weights {} + {} must be non-negative and sum to 1", avg_weight,
                                      max_weight));
  if (!(unrelated_cutoff >= 0.0 && unrelated_cutoff < 1.0))
    throw ValidationError(fmt::format("unrelated cutoff {} must lie in [0, 1)", unrelated_cutoff));
}

std::set<std::string, std::less<>> load_term_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open term list '{}'", path.string()));
  std::set<std::string, std::less<>> terms;
  std::string line;
  while (std::getline(in, line)) {
    std::string term = normalize_text(line);
    if (term.empty() || line.front() == '#') continue;
    terms.insert(std::move(term));
  }
  return terms;
}

ExtractionConfig default_extraction_config(const std::filesystem::path& lexicon_dir) {
  ExtractionConfig cfg;
  cfg.positive_terms = load_term_list(lexicon_dir / "positive.txt");
  cfg.negative_terms = load_term_list(lexicon_dir / "negative.txt");
  return cfg;
}

ExtractionConfig load_extraction_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open extraction config '{}'", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), path.string(), e.byte);
  }
  ExtractionConfig cfg;
  const auto base = path.parent_path();
  cfg.similarity_threshold = doc.value("similarity_threshold", cfg.similarity_threshold);
  if (auto it = doc.find("presence_weights"); it != doc.end()) {
    cfg.avg_weight = it->value("avg", cfg.avg_weight);
    cfg.max_weight = it->value("max", cfg.max_weight);
  }
  cfg.sentiment_window = doc.value("sentiment_window", cfg.sentiment_window);
  cfg.unrelated_cutoff = doc.value("unrelated_cutoff", cfg.unrelated_cutoff);
  cfg.strip_reasoning = doc.value("strip_reasoning", cfg.strip_reasoning);
  if (auto it = doc.find("positive_terms"); it != doc.end()) cfg.positive_terms = load_term_list(base / it->get<std::string>());
  if (auto it = doc.find("negative_terms"); it != doc.end()) cfg.negative_terms = load_term_list(base / it->get<std::string>());
  cfg.validate();
  return cfg;
}

PresenceResult presence_normalized(std::string_view response, std::string_view answer, const ExtractionConfig& cfg) {
  PresenceResult out;
  if (answer.empty() || response.size() < answer.size()) return out;
  const PatternDistance matcher(answer);
  const std::size_t width = answer.size();
  const std::size_t windows = response.size() - width + 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < windows; ++i) {
    const std::string_view window = response.substr(i, width);
    const double score = matcher.similarity(window);
    sum += score;
    if (score > out.max_score) out.max_score = score;
    if (score > cfg.similarity_threshold) out.matches.push_back({i, width, std::string(window), score});
  }
  out.avg_score = sum / static_cast<double>(windows);
  out.score_p = out.avg_score * cfg.avg_weight + out.max_score * cfg.max_weight;
  return out;
}

PresenceResult presence(std::string_view response, std::string_view answer_text, const ExtractionConfig& cfg) {
  return presence_normalized(normalize_text(response), normalize_text(answer_text), cfg);
}

namespace {

struct Word {
  std::size_t begin;
  std::size_t end;
};

std::vector<Word> split_words(std::string_view text) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) words.push_back({start, i});
  }
  return words;
}

}  // namespace

double sentiment_weight(const std::vector<Match>& matches, std::string_view response, const ExtractionConfig& cfg) {
  if (matches.empty()) return 0.5;
  const std::vector<Word> words = split_words(response);
  std::size_t positive = 0;
  std::size_t negative = 0;
  auto tally = [&](std::size_t w) {
    std::string_view word = response.substr(words[w].begin, words[w].end - words[w].begin);
    if (cfg.positive_terms.find(word) != cfg.positive_terms.end()) ++positive;
    if (cfg.negative_terms.find(word) != cfg.negative_terms.end()) ++negative;
  };
  for (const Match& m : matches) {
    const std::size_t span_end = m.offset + m.length;
    // First and one-past-last word overlapping the match span.
    auto first = std::find_if(words.begin(), words.end(), [&](const Word& w) { return w.end > m.offset; });
    auto last = std::find_if(first, words.end(), [&](const Word& w) { return w.begin >= span_end; });
    const auto first_idx = static_cast<std::size_t>(first - words.begin());
    const auto last_idx = static_cast<std::size_t>(last - words.begin());
    const std::size_t before = first_idx >= cfg.sentiment_window ? first_idx - cfg.sentiment_window : 0;
    for (std::size_t w = before; w < first_idx; ++w) tally(w);
    const std::size_t after = std::min(words.size(), last_idx + cfg.sentiment_window);
    for (std::size_t w = last_idx; w < after; ++w) tally(w);
  }
  return (1.0 + static_cast<double>(positive)) / (2.0 + static_cast<double>(positive + negative));
}

std::string strip_reasoning(std::string_view text) {
  static constexpr std::string_view kOpen = "<think>";
  static constexpr std::string_view kClose = "</think>";
  std::string out;
  std::size_t cursor = 0;
  std::size_t close_first = text.find(kClose);
  std::size_t open_first = text.find(kOpen);
  if (close_first != std::string_view::npos && (open_first == std::string_view::npos || close_first < open_first)) {
    cursor = close_first + kClose.size();
  }
  while (cursor < text.size()) {
    std::size_t open = text.find(kOpen, cursor);
    if (open == std::string_view::npos) {
      out.append(text.substr(cursor));
      break;
    }
    out.append(text.substr(cursor, open - cursor));
    std::size_t close = text.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) break;
    cursor = close + kClose.size();
  }
  return out;
}

std::optional<std::size_t> ChoiceScore::first_match_offset() const {
  if (matches.empty()) return std::nullopt;
  return matches.front().offset;
}

const ChoiceScore* AnswerScores::find(std::string_view key) const {
  auto it = std::find_if(choices.begin(), choices.end(), [&](const ChoiceScore& c) { return c.key == key; });
  return it == choices.end() ? nullptr : &*it;
}

AnswerScores extract(std::string_view response_text, const std::vector<AnswerChoice>& answers,
                     const ExtractionConfig& cfg) {
  const std::string response =
      normalize_text(cfg.strip_reasoning ? strip_reasoning(response_text) : std::string(response_text));
  AnswerScores out;
  out.choices.reserve(answers.size());
  for (const AnswerChoice& choice : answers) {
    ChoiceScore best;
    best.key = choice.key;
    bool have = false;
    for (MatchPass pass : {MatchPass::KeyLine, MatchPass::BareText}) {
      const std::string target = normalize_text(
          pass == MatchPass::KeyLine ? fmt::format("{}. {}", choice.key, choice.text) : choice.text);
      PresenceResult pr = presence_normalized(response, target, cfg);
      const double weight = sentiment_weight(pr.matches, response, cfg);
      const double confidence = pr.score_p * weight;
      if (!have || confidence > best.confidence) {
        best.score_p = pr.score_p;
        best.avg_score = pr.avg_score;
        best.max_score = pr.max_score;
        best.weight_s = weight;
        best.confidence = confidence;
        best.pass = pass;
        best.matches = std::move(pr.matches);
        have = true;
      }
    }
    out.choices.push_back(std::move(best));
  }

  const ChoiceScore* winner = nullptr;
  constexpr std::size_t kNoMatch = std::numeric_limits<std::size_t>::max();
  for (const ChoiceScore& c : out.choices) {
    if (winner == nullptr || c.confidence > winner->confidence) {
      winner = &c;
      continue;
    }
    if (c.confidence < winner->confidence) continue;
    const std::size_t c_off = c.first_match_offset().value_or(kNoMatch);
    const std::size_t w_off = winner->first_match_offset().value_or(kNoMatch);
    if (c_off < w_off || (c_off == w_off && c.key < winner->key)) winner = &c;
  }
  if (winner != nullptr && winner->confidence >= cfg.unrelated_cutoff) out.selected = winner->key;
  return out;
}

}  // namespace biasbench
