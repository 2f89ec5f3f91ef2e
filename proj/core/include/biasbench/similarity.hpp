#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace biasbench {

/// ASCII case folding only; other bytes pass through unchanged.
std::string fold_case(std::string_view text);

/// Text form used for fuzzy matching: case-folded, '-', '/' and '_' turned
/// into spaces, other ASCII punctuation removed, whitespace runs collapsed to
/// one space, ends trimmed. "**B. Yes," becomes "b yes".
std::string normalize_text(std::string_view text);

/// Levenshtein distance between two byte strings.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - edit_distance / max(|a|, |b|) after case folding; 1 for two empty strings.
double similarity(std::string_view a, std::string_view b);

/// Bit-parallel (Myers/Hyyrö) edit distance against a fixed pattern.
/// Preprocesses the pattern once so many windows can be scored cheaply.
class PatternDistance {
 public:
  explicit PatternDistance(std::string_view pattern);

  std::size_t pattern_size() const { return size_; }
  /// Levenshtein distance between the pattern and `text`.
  std::size_t distance(std::string_view text) const;
  /// 1 - distance / max(|pattern|, |text|).
  double similarity(std::string_view text) const;

 private:
  std::size_t size_ = 0;
  std::size_t blocks_ = 0;
  std::vector<std::uint64_t> peq_;  // 256 * blocks_, row per byte value
  mutable std::vector<std::uint64_t> pv_;
  mutable std::vector<std::uint64_t> mv_;
};

}  // namespace biasbench
