#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biasbench/template.hpp"

namespace biasbench {

/// Tunables of the answer extractor.
struct ExtractionConfig {
  /// Windows scoring strictly above this count as mentions.
  double similarity_threshold = 0.8;
  double avg_weight = 0.25;
  double max_weight = 0.75;
  /// Words inspected on each side of a mention.
  std::size_t sentiment_window = 10;
  std::set<std::string, std::less<>> positive_terms;
  std::set<std::string, std::less<>> negative_terms;
  /// Below this best confidence the response endorses no choice.
  double unrelated_cutoff = 0.3;
  /// Drop <think>...</think> deliberation before scoring.
  bool strip_reasoning = true;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

/// One lexicon term per line; blank lines and lines starting with '#' are skipped.
std::set<std::string, std::less<>> load_term_list(const std::filesystem::path& path);

/// Config with the shipped positive/negative term lists from `lexicon_dir`.
ExtractionConfig default_extraction_config(const std::filesystem::path& lexicon_dir);

/// JSON config file; relative lexicon paths resolve against the file's directory.
ExtractionConfig load_extraction_config(const std::filesystem::path& path);

/// A window scoring above the similarity threshold. Offsets index the
/// normalized response.
struct Match {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::string window;
  double similarity = 0.0;
};

struct PresenceResult {
  double score_p = 0.0;
  double avg_score = 0.0;
  double max_score = 0.0;
  std::vector<Match> matches;
};

/// Slides an |answer|-byte window over the response with stride 1. The
/// average runs over all |r| - |a| + 1 windows, so a response exactly as
/// long as the answer scores its single window's similarity. A response
/// shorter than the answer scores 0 with no matches.
/// Inputs must already be normalized (see normalize_text).
PresenceResult presence_normalized(std::string_view response, std::string_view answer,
                                   const ExtractionConfig& cfg);

/// presence_normalized after normalizing both texts.
PresenceResult presence(std::string_view response, std::string_view answer_text, const ExtractionConfig& cfg);

/// Laplace-smoothed endorsement ratio (1 + pos) / (2 + pos + neg), pooled
/// over the sentiment_window words on each side of every match. No matches
/// gives the neutral 0.5. `response` is the normalized text the match
/// offsets refer to.
double sentiment_weight(const std::vector<Match>& matches, std::string_view response, const ExtractionConfig& cfg);

/// Removes <think>...</think> blocks. A dangling "</think>" drops everything
/// before it; a dangling "<think>" drops everything after it.
std::string strip_reasoning(std::string_view text);

enum class MatchPass { KeyLine, BareText };

struct ChoiceScore {
  std::string key;
  double score_p = 0.0;
  double avg_score = 0.0;
  double max_score = 0.0;
  double weight_s = 0.5;
  /// score_p * weight_s of the winning pass.
  double confidence = 0.0;
  MatchPass pass = MatchPass::BareText;
  std::vector<Match> matches;

  std::optional<std::size_t> first_match_offset() const;
};

struct AnswerScores {
  std::vector<ChoiceScore> choices;  // same order as the answer list
  std::optional<std::string> selected;

  const ChoiceScore* find(std::string_view key) const;
};

/// Scores every choice twice, against "<key>. <text>" and against the bare
/// text, keeping the pass with the higher confidence. The highest confidence
/// wins; ties go to the earliest first mention, then the smaller key. No
/// choice is selected when the best confidence is below the cutoff.
AnswerScores extract(std::string_view response_text, const std::vector<AnswerChoice>& answers,
                     const ExtractionConfig& cfg);

}  // namespace biasbench
